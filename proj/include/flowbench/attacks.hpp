#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "flowbench/detector.hpp"
#include "flowbench/graph.hpp"
#include "flowbench/util.hpp"

namespace flowbench {

enum class AttackKind { PgdFeature, EdgeRemove, NodeInject };

const char* attack_kind_name(AttackKind k);
AttackKind attack_kind_from_name(const std::string& name);

struct AttackConfig {
   AttackKind kind = AttackKind::PgdFeature;
   double epsilon = 0.0;    // L-inf budget in standardized feature space
   int steps = 10;
   double step_size = 0.0;  // 0 means epsilon / 4
   double fraction = 0.0;   // removal/injection fraction
   uint64_t seed = 0;
   int edges_per_node = 5;  // synthetic out-edges per injected node
   // Optional per-feature clip box applied after each projection.
   std::vector<double> feature_min, feature_max;

   void validate() const;
   std::string condition_name() const; // e.g. "pgd_eps0.1", "edge_remove_p0.2"
};

// Everything needed to reproduce one attack exactly: the configuration plus
// the structural decisions that were sampled.
struct AttackManifest {
   AttackConfig config;
   std::vector<std::string> removed_flow_ids;
   std::vector<std::string> injected_node_ips;
   std::vector<GraphEdge> injected_edges;       // node refs valid in attacked graph
   std::vector<std::string> perturbed_flow_ids;
   std::vector<double> perturbation_linf;        // aligned with perturbed_flow_ids

   size_t injected_count() const { return injected_node_ips.size(); }
   bool is_injected(const std::string& ip) const;

   std::string to_json() const;
   static AttackManifest from_json(const std::string& text);
   void save(const std::string& path) const;
   static AttackManifest load(const std::string& path);
};

struct AttackedGraph {
   CommGraph graph;
   AttackManifest manifest;
};

// Projected gradient ascent on edge features inside an L-inf ball of radius
// epsilon around the clean values. Epsilon zero returns the graph unchanged.
// Labels are the evaluation labels of the edges under attack.
AttackedGraph pgd_perturb(const CommGraph& clean, const DetectorModel& model,
                          const AttackConfig& config);

// Removes round(fraction * |E|) seeded-uniform edges; the node set is kept.
AttackedGraph remove_edges(const CommGraph& clean, const AttackConfig& config);

// Adds round(fraction * |V|) new nodes, each with edges_per_node synthetic
// flood edges toward seeded-uniform original nodes. Synthetic features follow
// a TCP SYN flood profile expressed in the graph's standardized space.
AttackedGraph inject_nodes(const CommGraph& clean, const AttackConfig& config);

// Dispatch on config.kind; model may be null for structure-only attacks.
AttackedGraph apply_attack(const CommGraph& clean, const DetectorModel* model,
                           const AttackConfig& config);

// Reconstructs the attacked graph from a manifest. Structural attacks replay
// from recorded decisions; feature perturbation re-runs deterministically and
// requires the model that produced it.
AttackedGraph replay_attack(const CommGraph& clean, const AttackManifest& manifest,
                            const DetectorModel* model);

// Raw-space SYN flood profile used for injected edges; exposed for tests.
std::vector<double> syn_flood_profile(const std::vector<std::string>& feature_names,
                                      Rng& rng);

} // namespace flowbench
