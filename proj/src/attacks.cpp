#include "flowbench/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include <json.hpp>

#include "flowbench/util.hpp"

namespace flowbench {

using nlohmann::json;

const char* attack_kind_name(AttackKind k)
{
   switch (k) {
   case AttackKind::PgdFeature:
      return "pgd";
   case AttackKind::EdgeRemove:
      return "edge_remove";
   case AttackKind::NodeInject:
      return "node_inject";
   }
   return "?";
}

AttackKind attack_kind_from_name(const std::string& name)
{
   if (name == "pgd")
      return AttackKind::PgdFeature;
   if (name == "edge_remove")
      return AttackKind::EdgeRemove;
   if (name == "node_inject")
      return AttackKind::NodeInject;
   throw std::invalid_argument("unknown attack kind: " + name);
}

void AttackConfig::validate() const
{
   if (epsilon < 0.0)
      throw std::invalid_argument("epsilon must be non-negative");
   if (steps < 1)
      throw std::invalid_argument("steps must be at least 1");
   if (step_size < 0.0)
      throw std::invalid_argument("step_size must be non-negative");
   if (fraction < 0.0 || fraction > 1.0)
      throw std::invalid_argument("fraction must lie in [0, 1]");
   if (edges_per_node < 1)
      throw std::invalid_argument("edges_per_node must be at least 1");
   if (feature_min.size() != feature_max.size())
      throw std::invalid_argument("clip box bounds have different widths");
}

std::string AttackConfig::condition_name() const
{
   char buf[64];
   switch (kind) {
   case AttackKind::PgdFeature:
      std::snprintf(buf, sizeof(buf), "pgd_eps%g", epsilon);
      break;
   case AttackKind::EdgeRemove:
      std::snprintf(buf, sizeof(buf), "edge_remove_p%g", fraction);
      break;
   case AttackKind::NodeInject:
      std::snprintf(buf, sizeof(buf), "node_inject_p%g", fraction);
      break;
   }
   return buf;
}

bool AttackManifest::is_injected(const std::string& ip) const
{
   return std::find(injected_node_ips.begin(), injected_node_ips.end(), ip) !=
          injected_node_ips.end();
}

AttackedGraph pgd_perturb(const CommGraph& clean, const DetectorModel& model,
                          const AttackConfig& config)
{
   config.validate();
   if (config.kind != AttackKind::PgdFeature)
      throw std::invalid_argument("config kind is not pgd");
   AttackedGraph out;
   out.graph = clean;
   out.manifest.config = config;
   if (config.epsilon == 0.0)
      return out; // exact no-op, including feature bit patterns

   double alpha = config.step_size > 0.0 ? config.step_size : config.epsilon / 4.0;
   std::vector<char> labels = edge_labels(clean);
   const bool clip = !config.feature_min.empty();
   if (clip && config.feature_min.size() != clean.feature_names.size())
      throw std::invalid_argument("clip box width does not match features");

   for (int step = 0; step < config.steps; ++step) {
      auto grads = loss_gradient(model, out.graph, labels);
      for (size_t i = 0; i < out.graph.edges.size(); ++i) {
         auto& x = out.graph.edges[i].features;
         const auto& x0 = clean.edges[i].features;
         for (size_t j = 0; j < x.size(); ++j) {
            double g = grads[i][j];
            if (g > 0.0)
               x[j] += alpha;
            else if (g < 0.0)
               x[j] -= alpha;
            x[j] = std::clamp(x[j], x0[j] - config.epsilon, x0[j] + config.epsilon);
            if (clip)
               x[j] = std::clamp(x[j], config.feature_min[j], config.feature_max[j]);
         }
      }
   }
   for (size_t i = 0; i < out.graph.edges.size(); ++i) {
      double linf = 0.0;
      for (size_t j = 0; j < clean.edges[i].features.size(); ++j)
         linf = std::max(linf, std::abs(out.graph.edges[i].features[j] -
                                        clean.edges[i].features[j]));
      if (linf > 0.0) {
         out.manifest.perturbed_flow_ids.push_back(clean.edges[i].flow_id);
         out.manifest.perturbation_linf.push_back(linf);
      }
   }
   return out;
}

AttackedGraph remove_edges(const CommGraph& clean, const AttackConfig& config)
{
   config.validate();
   if (config.kind != AttackKind::EdgeRemove)
      throw std::invalid_argument("config kind is not edge_remove");
   size_t k = static_cast<size_t>(
       round_half_up(config.fraction * static_cast<double>(clean.edges.size())));
   k = std::min(k, clean.edges.size());

   std::vector<size_t> idx(clean.edges.size());
   for (size_t i = 0; i < idx.size(); ++i)
      idx[i] = i;
   Rng rng(derive_seed(config.seed, "edge-remove"));
   // Partial Fisher-Yates: the first k entries are the removal set.
   for (size_t i = 0; i < k; ++i) {
      size_t j = i + static_cast<size_t>(rng.bounded(idx.size() - i));
      std::swap(idx[i], idx[j]);
   }
   std::vector<char> removed(clean.edges.size(), 0);
   AttackedGraph out;
   out.manifest.config = config;
   for (size_t i = 0; i < k; ++i) {
      removed[idx[i]] = 1;
      out.manifest.removed_flow_ids.push_back(clean.edges[idx[i]].flow_id);
   }
   out.graph.node_ips = clean.node_ips;
   out.graph.node_index = clean.node_index;
   out.graph.node_features = clean.node_features;
   out.graph.feature_names = clean.feature_names;
   out.graph.stats = clean.stats;
   for (size_t i = 0; i < clean.edges.size(); ++i)
      if (!removed[i])
         out.graph.edges.push_back(clean.edges[i]);
   return out;
}

std::vector<double> syn_flood_profile(const std::vector<std::string>& feature_names,
                                      Rng& rng)
{
   // High-rate SYN flood: many small inbound packets, near-zero response,
   // short duration, TCP with only the SYN bit set.
   double in_pkts = std::floor(rng.uniform(8000.0, 12000.0));
   double out_pkts = std::floor(rng.uniform(0.0, 4.0));
   std::vector<double> raw;
   raw.reserve(feature_names.size());
   for (const auto& name : feature_names) {
      double v = 0.0;
      if (name == "IN_PKTS")
         v = in_pkts;
      else if (name == "IN_BYTES")
         v = in_pkts * 40.0;
      else if (name == "OUT_PKTS")
         v = out_pkts;
      else if (name == "OUT_BYTES")
         v = out_pkts * 40.0;
      else if (name == "FLOW_DURATION_MILLISECONDS")
         v = std::floor(rng.uniform(0.0, 100.0));
      else if (name == "PROTOCOL")
         v = 6.0;
      else if (name == "L7_PROTO")
         v = 0.0;
      else if (name == "TCP_FLAGS")
         v = 2.0;
      else if (name == "L4_SRC_PORT")
         v = std::floor(rng.uniform(1024.0, 65536.0));
      else if (name == "L4_DST_PORT")
         v = 80.0;
      raw.push_back(v);
   }
   return raw;
}

AttackedGraph inject_nodes(const CommGraph& clean, const AttackConfig& config)
{
   config.validate();
   if (config.kind != AttackKind::NodeInject)
      throw std::invalid_argument("config kind is not node_inject");
   if (clean.node_ips.empty())
      throw std::invalid_argument("cannot inject into an empty graph");

   int width = clean.node_feature_width();
   size_t n_orig = clean.node_ips.size();
   size_t m = static_cast<size_t>(
       round_half_up(config.fraction * static_cast<double>(n_orig)));

   AttackedGraph out;
   out.graph = clean;
   out.manifest.config = config;
   Rng rng(derive_seed(config.seed, "node-inject"));

   for (size_t i = 0; i < m; ++i) {
      // Addresses from the 198.18.0.0/15 benchmarking block, skipping any
      // address already present.
      std::string ip;
      do {
         uint64_t r = rng.next_u64();
         ip = "198." + std::to_string(18 + (r & 1)) + "." +
              std::to_string((r >> 8) & 0xFF) + "." + std::to_string((r >> 16) & 0xFF);
      } while (out.graph.node_index.count(ip));
      int src = out.graph.intern_node(ip, width);
      out.manifest.injected_node_ips.push_back(ip);

      for (int e = 0; e < config.edges_per_node; ++e) {
         GraphEdge edge;
         edge.src = src;
         edge.dst = static_cast<int>(rng.bounded(n_orig)); // victims are original nodes
         std::vector<double> raw = syn_flood_profile(clean.feature_names, rng);
         edge.features.resize(raw.size());
         for (size_t j = 0; j < raw.size(); ++j)
            edge.features[j] = (raw[j] - clean.stats.mean[j]) / clean.stats.stdev[j];
         edge.flow_id = "inj-" + std::to_string(config.seed) + "-" +
                        std::to_string(i * config.edges_per_node + e);
         edge.label = "DoS";
         edge.attack = true;
         edge.provenance = Provenance::Synthetic;
         edge.dataset_source = "synthetic";
         out.manifest.injected_edges.push_back(edge);
         out.graph.edges.push_back(std::move(edge));
      }
   }
   return out;
}

AttackedGraph apply_attack(const CommGraph& clean, const DetectorModel* model,
                           const AttackConfig& config)
{
   switch (config.kind) {
   case AttackKind::PgdFeature:
      if (!model)
         throw std::invalid_argument("pgd requires a model");
      return pgd_perturb(clean, *model, config);
   case AttackKind::EdgeRemove:
      return remove_edges(clean, config);
   case AttackKind::NodeInject:
      return inject_nodes(clean, config);
   }
   throw std::logic_error("unhandled attack kind");
}

AttackedGraph replay_attack(const CommGraph& clean, const AttackManifest& manifest,
                            const DetectorModel* model)
{
   switch (manifest.config.kind) {
   case AttackKind::PgdFeature: {
      if (!model)
         throw std::invalid_argument("pgd replay requires the original model");
      return pgd_perturb(clean, *model, manifest.config);
   }
   case AttackKind::EdgeRemove: {
      std::unordered_set<std::string> removed(manifest.removed_flow_ids.begin(),
                                              manifest.removed_flow_ids.end());
      AttackedGraph out;
      out.manifest = manifest;
      out.graph.node_ips = clean.node_ips;
      out.graph.node_index = clean.node_index;
      out.graph.node_features = clean.node_features;
      out.graph.feature_names = clean.feature_names;
      out.graph.stats = clean.stats;
      for (const auto& e : clean.edges)
         if (!removed.count(e.flow_id))
            out.graph.edges.push_back(e);
      return out;
   }
   case AttackKind::NodeInject: {
      AttackedGraph out;
      out.manifest = manifest;
      out.graph = clean;
      int width = clean.node_feature_width();
      for (const auto& ip : manifest.injected_node_ips)
         out.graph.intern_node(ip, width);
      for (const auto& e : manifest.injected_edges) {
         if (e.src >= out.graph.node_count() || e.dst >= out.graph.node_count())
            throw std::runtime_error("manifest edge references unknown node");
         out.graph.edges.push_back(e);
      }
      return out;
   }
   }
   throw std::logic_error("unhandled attack kind");
}

namespace {

json edge_to_json(const GraphEdge& e)
{
   return json{{"src", e.src},
               {"dst", e.dst},
               {"features", e.features},
               {"flow_id", e.flow_id},
               {"label", e.label},
               {"attack", e.attack},
               {"provenance", provenance_name(e.provenance)},
               {"dataset_source", e.dataset_source}};
}

GraphEdge edge_from_json(const json& j)
{
   GraphEdge e;
   e.src = j.at("src").get<int>();
   e.dst = j.at("dst").get<int>();
   e.features = j.at("features").get<std::vector<double>>();
   e.flow_id = j.at("flow_id").get<std::string>();
   e.label = j.at("label").get<std::string>();
   e.attack = j.at("attack").get<bool>();
   e.provenance = provenance_from_name(j.at("provenance").get<std::string>());
   e.dataset_source = j.at("dataset_source").get<std::string>();
   return e;
}

} // namespace

std::string AttackManifest::to_json() const
{
   json j;
   j["config"] = {{"kind", attack_kind_name(config.kind)},
                  {"epsilon", config.epsilon},
                  {"steps", config.steps},
                  {"step_size", config.step_size},
                  {"fraction", config.fraction},
                  {"seed", config.seed},
                  {"edges_per_node", config.edges_per_node},
                  {"feature_min", config.feature_min},
                  {"feature_max", config.feature_max}};
   j["removed_flow_ids"] = removed_flow_ids;
   j["injected_node_ips"] = injected_node_ips;
   j["injected_edges"] = json::array();
   for (const auto& e : injected_edges)
      j["injected_edges"].push_back(edge_to_json(e));
   j["perturbed_flow_ids"] = perturbed_flow_ids;
   j["perturbation_linf"] = perturbation_linf;
   return j.dump(2);
}

AttackManifest AttackManifest::from_json(const std::string& text)
{
   json j = json::parse(text);
   AttackManifest m;
   const json& c = j.at("config");
   m.config.kind = attack_kind_from_name(c.at("kind").get<std::string>());
   m.config.epsilon = c.at("epsilon").get<double>();
   m.config.steps = c.at("steps").get<int>();
   m.config.step_size = c.at("step_size").get<double>();
   m.config.fraction = c.at("fraction").get<double>();
   m.config.seed = c.at("seed").get<uint64_t>();
   m.config.edges_per_node = c.at("edges_per_node").get<int>();
   m.config.feature_min = c.value("feature_min", std::vector<double>{});
   m.config.feature_max = c.value("feature_max", std::vector<double>{});
   m.removed_flow_ids = j.at("removed_flow_ids").get<std::vector<std::string>>();
   m.injected_node_ips = j.at("injected_node_ips").get<std::vector<std::string>>();
   for (const auto& e : j.at("injected_edges"))
      m.injected_edges.push_back(edge_from_json(e));
   m.perturbed_flow_ids = j.at("perturbed_flow_ids").get<std::vector<std::string>>();
   m.perturbation_linf = j.at("perturbation_linf").get<std::vector<double>>();
   return m;
}

void AttackManifest::save(const std::string& path) const
{
   std::ofstream out(path);
   if (!out)
      throw std::runtime_error("cannot write attack manifest: " + path);
   out << to_json() << "\n";
}

AttackManifest AttackManifest::load(const std::string& path)
{
   std::ifstream in(path);
   if (!in)
      throw std::runtime_error("cannot read attack manifest: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return from_json(ss.str());
}

} // namespace flowbench
