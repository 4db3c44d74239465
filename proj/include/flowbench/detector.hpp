#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flowbench/graph.hpp"

namespace flowbench {

struct DetectorConfig {
   int hidden = 16;
   int epochs = 150;
   double learning_rate = 0.05;
   uint64_t seed = 0;
};

// Two-layer perceptron scoring one edge at a time. Input is the edge feature
// vector concatenated with the mean of the two endpoint node vectors; hidden
// activation tanh, output a logistic probability of the attack class.
struct DetectorModel {
   std::vector<std::string> feature_names;
   int edge_dim = 0;
   int node_dim = 0;
   int hidden_dim = 0;
   // w1 is hidden x (edge_dim + node_dim), row-major; w2 is hidden wide.
   std::vector<double> w1, b1, w2;
   double b2 = 0.0;
   ScalerStats stats;
   DetectorConfig config;

   int input_dim() const { return edge_dim + node_dim; }

   std::string to_json() const;
   static DetectorModel from_json(const std::string& text);
   void save(const std::string& path) const;
   static DetectorModel load(const std::string& path);
};

DetectorModel init_model(const CommGraph& graph, const DetectorConfig& config);

// Full-batch Adam on mean binary cross-entropy over edges; bit-reproducible
// for a fixed seed. Labels default to the graph's own edge labels.
DetectorModel train_detector(const CommGraph& graph, const DetectorConfig& config);
DetectorModel train_detector(const CommGraph& graph, const std::vector<char>& labels,
                             const DetectorConfig& config);

std::vector<double> predict(const DetectorModel& model, const CommGraph& graph);

double mean_bce_loss(const DetectorModel& model, const CommGraph& graph,
                     const std::vector<char>& labels);

// d(mean loss)/d(edge features), one gradient row per edge.
std::vector<std::vector<double>> loss_gradient(const DetectorModel& model,
                                               const CommGraph& graph,
                                               const std::vector<char>& labels);

std::vector<char> edge_labels(const CommGraph& graph);

struct Metrics {
   int64_t tp = 0, fp = 0, tn = 0, fn = 0;
   double accuracy = 0.0;
   double precision_weighted = 0.0;
   double recall = 0.0; // attack-class recall
   double f1_weighted = 0.0;
   double auc = 0.0;

   double precision_attack() const;
};

// Scores thresholded at 0.5 (score >= 0.5 predicts attack). AUC is the
// rank-based two-sample statistic with average ranks on ties; degenerate
// single-class inputs evaluate to AUC 0.5 and zero for undefined ratios.
Metrics evaluate(const std::vector<double>& scores, const std::vector<char>& labels);

// Per-class recall over categorical labels, for attack-type breakdowns.
std::vector<std::pair<std::string, double>>
per_class_recall(const std::vector<double>& scores, const std::vector<char>& binary,
                 const std::vector<std::string>& classes);

} // namespace flowbench
