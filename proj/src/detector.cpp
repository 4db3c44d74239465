#include "flowbench/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flowbench/util.hpp"

namespace flowbench {

using nlohmann::json;

namespace {

constexpr double kProbFloor = 1e-12; // keeps log() finite

double sigmoid(double z)
{
   return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

// Assembles the model input for one edge.
void edge_input(const DetectorModel& m, const CommGraph& g, const GraphEdge& e,
                std::vector<double>& x)
{
   if (static_cast<int>(e.features.size()) != m.edge_dim)
      throw std::invalid_argument("edge feature width does not match model");
   const auto& ns = g.node_features[e.src];
   const auto& nd = g.node_features[e.dst];
   if (static_cast<int>(ns.size()) != m.node_dim)
      throw std::invalid_argument("node feature width does not match model");
   x.resize(m.input_dim());
   for (int j = 0; j < m.edge_dim; ++j)
      x[j] = e.features[j];
   for (int j = 0; j < m.node_dim; ++j)
      x[m.edge_dim + j] = 0.5 * (ns[j] + nd[j]);
}

struct Forward {
   std::vector<double> h;  // tanh activations
   double z2 = 0.0;        // output logit
   double p = 0.0;         // sigmoid(z2)
};

Forward forward(const DetectorModel& m, const std::vector<double>& x)
{
   Forward f;
   f.h.resize(m.hidden_dim);
   for (int i = 0; i < m.hidden_dim; ++i) {
      double z = m.b1[i];
      const double* w = &m.w1[static_cast<size_t>(i) * m.input_dim()];
      for (int j = 0; j < m.input_dim(); ++j)
         z += w[j] * x[j];
      f.h[i] = std::tanh(z);
   }
   f.z2 = m.b2;
   for (int i = 0; i < m.hidden_dim; ++i)
      f.z2 += m.w2[i] * f.h[i];
   f.p = sigmoid(f.z2);
   return f;
}

struct ParamGrads {
   std::vector<double> w1, b1, w2;
   double b2 = 0.0;
};

// Accumulates parameter gradients of BCE for one edge; also returns the
// gradient w.r.t. the input when `dx` is non-null.
void backward(const DetectorModel& m, const std::vector<double>& x, const Forward& f,
              double y, ParamGrads* pg, std::vector<double>* dx)
{
   double dz2 = f.p - y; // d(BCE)/d(z2)
   if (pg) {
      pg->b2 += dz2;
      for (int i = 0; i < m.hidden_dim; ++i)
         pg->w2[i] += dz2 * f.h[i];
   }
   if (dx) {
      dx->assign(m.input_dim(), 0.0);
   }
   for (int i = 0; i < m.hidden_dim; ++i) {
      double dz1 = dz2 * m.w2[i] * (1.0 - f.h[i] * f.h[i]);
      const double* w = &m.w1[static_cast<size_t>(i) * m.input_dim()];
      if (pg) {
         pg->b1[i] += dz1;
         double* gw = &pg->w1[static_cast<size_t>(i) * m.input_dim()];
         for (int j = 0; j < m.input_dim(); ++j)
            gw[j] += dz1 * x[j];
      }
      if (dx)
         for (int j = 0; j < m.input_dim(); ++j)
            (*dx)[j] += dz1 * w[j];
   }
}

double bce(double p, double y)
{
   double pc = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
   return -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
}

void check_graph(const CommGraph& g, const std::vector<char>& labels)
{
   if (g.edges.empty())
      throw std::invalid_argument("graph has no edges");
   if (labels.size() != g.edges.size())
      throw std::invalid_argument("label count does not match edge count");
}

} // namespace

std::vector<char> edge_labels(const CommGraph& graph)
{
   std::vector<char> y;
   y.reserve(graph.edges.size());
   for (const auto& e : graph.edges)
      y.push_back(e.attack ? 1 : 0);
   return y;
}

DetectorModel init_model(const CommGraph& graph, const DetectorConfig& config)
{
   if (config.hidden <= 0)
      throw std::invalid_argument("hidden width must be positive");
   DetectorModel m;
   m.feature_names = graph.feature_names;
   m.edge_dim = static_cast<int>(graph.feature_names.size());
   m.node_dim = graph.node_feature_width();
   if (m.node_dim <= 0)
      throw std::invalid_argument("graph has no node features");
   m.hidden_dim = config.hidden;
   m.stats = graph.stats;
   m.config = config;
   Rng rng(derive_seed(config.seed, "detector-init"));
   double s1 = 1.0 / std::sqrt(static_cast<double>(m.input_dim()));
   double s2 = 1.0 / std::sqrt(static_cast<double>(m.hidden_dim));
   m.w1.resize(static_cast<size_t>(m.hidden_dim) * m.input_dim());
   for (auto& w : m.w1)
      w = rng.normal(0.0, s1);
   m.b1.assign(m.hidden_dim, 0.0);
   m.w2.resize(m.hidden_dim);
   for (auto& w : m.w2)
      w = rng.normal(0.0, s2);
   m.b2 = 0.0;
   return m;
}

DetectorModel train_detector(const CommGraph& graph, const DetectorConfig& config)
{
   return train_detector(graph, edge_labels(graph), config);
}

DetectorModel train_detector(const CommGraph& graph, const std::vector<char>& labels,
                             const DetectorConfig& config)
{
   check_graph(graph, labels);
   bool has_pos = false, has_neg = false;
   for (char y : labels)
      (y ? has_pos : has_neg) = true;
   if (!has_pos || !has_neg)
      throw std::invalid_argument("training labels contain a single class");

   DetectorModel m = init_model(graph, config);
   size_t np = m.w1.size() + m.b1.size() + m.w2.size() + 1;
   std::vector<double> adam_m(np, 0.0), adam_v(np, 0.0);
   const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
   double n = static_cast<double>(graph.edges.size());

   std::vector<double> x;
   for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      ParamGrads pg;
      pg.w1.assign(m.w1.size(), 0.0);
      pg.b1.assign(m.b1.size(), 0.0);
      pg.w2.assign(m.w2.size(), 0.0);
      pg.b2 = 0.0;
      for (size_t i = 0; i < graph.edges.size(); ++i) {
         edge_input(m, graph, graph.edges[i], x);
         Forward f = forward(m, x);
         backward(m, x, f, labels[i] ? 1.0 : 0.0, &pg, nullptr);
      }
      // Mean gradients, then one Adam step over the flattened parameters.
      auto step = [&](double* w, double g, size_t k) {
         g /= n;
         adam_m[k] = beta1 * adam_m[k] + (1.0 - beta1) * g;
         adam_v[k] = beta2 * adam_v[k] + (1.0 - beta2) * g * g;
         double mh = adam_m[k] / (1.0 - std::pow(beta1, epoch));
         double vh = adam_v[k] / (1.0 - std::pow(beta2, epoch));
         *w -= config.learning_rate * mh / (std::sqrt(vh) + eps);
      };
      size_t k = 0;
      for (size_t i = 0; i < m.w1.size(); ++i)
         step(&m.w1[i], pg.w1[i], k++);
      for (size_t i = 0; i < m.b1.size(); ++i)
         step(&m.b1[i], pg.b1[i], k++);
      for (size_t i = 0; i < m.w2.size(); ++i)
         step(&m.w2[i], pg.w2[i], k++);
      step(&m.b2, pg.b2, k++);
   }
   return m;
}

std::vector<double> predict(const DetectorModel& model, const CommGraph& graph)
{
   std::vector<double> scores;
   scores.reserve(graph.edges.size());
   std::vector<double> x;
   for (const auto& e : graph.edges) {
      edge_input(model, graph, e, x);
      scores.push_back(forward(model, x).p);
   }
   return scores;
}

double mean_bce_loss(const DetectorModel& model, const CommGraph& graph,
                     const std::vector<char>& labels)
{
   check_graph(graph, labels);
   double sum = 0.0;
   std::vector<double> x;
   for (size_t i = 0; i < graph.edges.size(); ++i) {
      edge_input(model, graph, graph.edges[i], x);
      sum += bce(forward(model, x).p, labels[i] ? 1.0 : 0.0);
   }
   return sum / static_cast<double>(graph.edges.size());
}

std::vector<std::vector<double>> loss_gradient(const DetectorModel& model,
                                               const CommGraph& graph,
                                               const std::vector<char>& labels)
{
   check_graph(graph, labels);
   double n = static_cast<double>(graph.edges.size());
   std::vector<std::vector<double>> grads;
   grads.reserve(graph.edges.size());
   std::vector<double> x, dx;
   for (size_t i = 0; i < graph.edges.size(); ++i) {
      edge_input(model, graph, graph.edges[i], x);
      Forward f = forward(model, x);
      backward(model, x, f, labels[i] ? 1.0 : 0.0, nullptr, &dx);
      // Only the edge-feature block; node features are fixed inputs.
      std::vector<double> g(dx.begin(), dx.begin() + model.edge_dim);
      for (auto& v : g)
         v /= n;
      grads.push_back(std::move(g));
   }
   return grads;
}

double Metrics::precision_attack() const
{
   int64_t d = tp + fp;
   return d == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(d);
}

Metrics evaluate(const std::vector<double>& scores, const std::vector<char>& labels)
{
   if (scores.empty() || scores.size() != labels.size())
      throw std::invalid_argument("scores and labels must be non-empty and aligned");
   Metrics m;
   for (size_t i = 0; i < scores.size(); ++i) {
      bool pred = scores[i] >= 0.5;
      bool truth = labels[i] != 0;
      if (pred && truth)
         ++m.tp;
      else if (pred && !truth)
         ++m.fp;
      else if (!pred && !truth)
         ++m.tn;
      else
         ++m.fn;
   }
   double n = static_cast<double>(scores.size());
   m.accuracy = static_cast<double>(m.tp + m.tn) / n;

   auto ratio = [](int64_t a, int64_t b) {
      return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
   };
   double prec_pos = ratio(m.tp, m.tp + m.fp);
   double prec_neg = ratio(m.tn, m.tn + m.fn);
   double rec_pos = ratio(m.tp, m.tp + m.fn);
   double rec_neg = ratio(m.tn, m.tn + m.fp);
   auto f1 = [](double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); };
   double n_pos = static_cast<double>(m.tp + m.fn);
   double n_neg = static_cast<double>(m.tn + m.fp);
   m.recall = rec_pos;
   m.precision_weighted = (n_pos * prec_pos + n_neg * prec_neg) / n;
   m.f1_weighted = (n_pos * f1(prec_pos, rec_pos) + n_neg * f1(prec_neg, rec_neg)) / n;

   // Rank statistic with average ranks on tied scores.
   if (n_pos == 0.0 || n_neg == 0.0) {
      m.auc = 0.5;
      return m;
   }
   std::vector<size_t> order(scores.size());
   std::iota(order.begin(), order.end(), 0);
   std::sort(order.begin(), order.end(),
             [&](size_t a, size_t b) { return scores[a] < scores[b]; });
   std::vector<double> rank(scores.size(), 0.0);
   size_t i = 0;
   while (i < order.size()) {
      size_t j = i;
      while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]])
         ++j;
      double avg = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
      for (size_t k = i; k <= j; ++k)
         rank[order[k]] = avg;
      i = j + 1;
   }
   double rank_sum_pos = 0.0;
   for (size_t k = 0; k < scores.size(); ++k)
      if (labels[k])
         rank_sum_pos += rank[k];
   m.auc = (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
   return m;
}

std::vector<std::pair<std::string, double>>
per_class_recall(const std::vector<double>& scores, const std::vector<char>& binary,
                 const std::vector<std::string>& classes)
{
   if (scores.size() != binary.size() || scores.size() != classes.size())
      throw std::invalid_argument("per-class recall inputs must be aligned");
   std::map<std::string, std::pair<int64_t, int64_t>> agg; // class -> (hit, total)
   for (size_t i = 0; i < scores.size(); ++i) {
      if (!binary[i])
         continue;
      auto& [hit, total] = agg[classes[i]];
      ++total;
      if (scores[i] >= 0.5)
         ++hit;
   }
   std::vector<std::pair<std::string, double>> out;
   for (const auto& [cls, ht] : agg)
      out.emplace_back(cls, ht.second == 0
                                ? 0.0
                                : static_cast<double>(ht.first) /
                                      static_cast<double>(ht.second));
   return out;
}

std::string DetectorModel::to_json() const
{
   json j;
   j["feature_names"] = feature_names;
   j["edge_dim"] = edge_dim;
   j["node_dim"] = node_dim;
   j["hidden_dim"] = hidden_dim;
   j["w1"] = w1;
   j["b1"] = b1;
   j["w2"] = w2;
   j["b2"] = b2;
   j["stats"] = json::parse(stats.to_json());
   j["config"] = {{"hidden", config.hidden},
                  {"epochs", config.epochs},
                  {"learning_rate", config.learning_rate},
                  {"seed", config.seed}};
   return j.dump(2);
}

DetectorModel DetectorModel::from_json(const std::string& text)
{
   json j = json::parse(text);
   DetectorModel m;
   m.feature_names = j.at("feature_names").get<std::vector<std::string>>();
   m.edge_dim = j.at("edge_dim").get<int>();
   m.node_dim = j.at("node_dim").get<int>();
   m.hidden_dim = j.at("hidden_dim").get<int>();
   m.w1 = j.at("w1").get<std::vector<double>>();
   m.b1 = j.at("b1").get<std::vector<double>>();
   m.w2 = j.at("w2").get<std::vector<double>>();
   m.b2 = j.at("b2").get<double>();
   m.stats = ScalerStats::from_json(j.at("stats").dump());
   m.config.hidden = j.at("config").value("hidden", 16);
   m.config.epochs = j.at("config").value("epochs", 150);
   m.config.learning_rate = j.at("config").value("learning_rate", 0.05);
   m.config.seed = j.at("config").value("seed", 0ULL);
   if (m.w1.size() != static_cast<size_t>(m.hidden_dim) * (m.edge_dim + m.node_dim) ||
       m.b1.size() != static_cast<size_t>(m.hidden_dim) ||
       m.w2.size() != static_cast<size_t>(m.hidden_dim))
      throw std::runtime_error("model parameter shapes are inconsistent");
   return m;
}

void DetectorModel::save(const std::string& path) const
{
   std::ofstream out(path);
   if (!out)
      throw std::runtime_error("cannot write model: " + path);
   out << to_json() << "\n";
}

DetectorModel DetectorModel::load(const std::string& path)
{
   std::ifstream in(path);
   if (!in)
      throw std::runtime_error("cannot read model: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return from_json(ss.str());
}

} // namespace flowbench
