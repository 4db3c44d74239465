#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "flowbench/attacks.hpp"
#include "flowbench/detector.hpp"
#include "flowbench/mitigation.hpp"
#include "flowbench/sampler.hpp"
#include "flowbench/standardize.hpp"
#include "flowbench/synth.hpp"

namespace flowbench {

struct DatasetInput {
   std::string name;
   std::string csv_path;     // unified CSV, or raw CSV with a mapping
   std::string mapping_path; // empty means the file is already unified
};

// Full benchmark configuration; everything is reproducible from master_seed.
struct RunConfig {
   std::vector<DatasetInput> datasets; // empty: synthesize the default sessions
   std::string synth_flood_target = "192.168.2.8";
   double synth_rate_scale = 1.0;

   bool sample = false;
   SamplingConfig sampling;

   SplitSpec split;
   DetectorConfig detector;
   std::vector<std::string> features = default_feature_names();
   int node_feature_width = kDefaultNodeFeatureWidth;

   std::vector<double> pgd_epsilons = {0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7};
   std::vector<double> edge_remove_fractions = {0.01, 0.05, 0.1, 0.2, 0.3};
   std::vector<double> node_inject_fractions = {0.01, 0.05, 0.1, 0.2};
   int pgd_steps = 10;

   MitigationConfig mitigation;
   bool mitigation_remote = false;      // default analyst is the offline heuristic
   bool eval_original_edges_only = false;

   uint64_t master_seed = 0;
   std::string out_dir = "runs/out";

   static RunConfig from_json_text(const std::string& text);
   static RunConfig from_json_file(const std::string& path);
   nlohmann::json to_json() const;
};

struct RunResult {
   nlohmann::json report;
   bool ok = true;
};

// Executes the four-step protocol: per-dataset baselines, cross-dataset
// drift over all ordered source pairs, the attack grid against the
// unified-trained model, and analyst mitigation for every injection
// condition. A stage failure is recorded in report["errors"] and the
// remaining stages still run where their inputs exist.
RunResult run_protocol(const RunConfig& config);

// report.json plus a flat CSV with one row per (step, condition, metric).
void emit_report(const nlohmann::json& report, const std::string& json_path,
                 const std::string& csv_path);

nlohmann::json metrics_json(const Metrics& m);

} // namespace flowbench
