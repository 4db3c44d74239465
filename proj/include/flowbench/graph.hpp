#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "flowbench/flow.hpp"
#include "flowbench/standardize.hpp"

namespace flowbench {

enum class Provenance { Original, Synthetic };

const char* provenance_name(Provenance p);
Provenance provenance_from_name(const std::string& name);

// One directed edge per flow; parallel edges are preserved.
struct GraphEdge {
   int src = 0;
   int dst = 0;
   std::vector<double> features; // standardized, ordered as CommGraph::feature_names
   std::string flow_id;
   std::string label;
   bool attack = false;
   Provenance provenance = Provenance::Original;
   std::string dataset_source;
};

// IP-centric communication multigraph. One node per distinct address in
// first-appearance order; node features are uniform constants by default.
struct CommGraph {
   std::vector<std::string> node_ips;
   std::unordered_map<std::string, int> node_index;
   std::vector<std::vector<double>> node_features;
   std::vector<GraphEdge> edges;
   std::vector<std::string> feature_names;
   ScalerStats stats; // scaler the edge features were produced with

   int node_count() const { return static_cast<int>(node_ips.size()); }
   int edge_count() const { return static_cast<int>(edges.size()); }

   // Adds the address if unseen and returns its index.
   int intern_node(const std::string& ip, int node_feature_width);

   int node_feature_width() const
   {
      return node_features.empty() ? 0 : static_cast<int>(node_features[0].size());
   }
};

inline constexpr int kDefaultNodeFeatureWidth = 8;

// Builds the graph from standardized records: features are extracted per
// stats.feature_names and scaled with `stats`.
CommGraph build_graph(const std::vector<FlowRecord>& flows, const ScalerStats& stats,
                      int node_feature_width = kDefaultNodeFeatureWidth);

// Union of already-built graphs; feature schemas must match exactly. Nodes
// merge by address, edge multisets concatenate.
CommGraph merge_graphs(std::span<const CommGraph> graphs);

// nodes.csv: node_id,ip / edges.csv: src_id,dst_id,flow_id,provenance,label,<features...>
void write_graph_csv(const CommGraph& g, const std::string& nodes_path,
                     const std::string& edges_path);
CommGraph read_graph_csv(const std::string& nodes_path, const std::string& edges_path,
                         const ScalerStats& stats,
                         int node_feature_width = kDefaultNodeFeatureWidth);

// Exact structural and feature equality.
bool graph_equal(const CommGraph& a, const CommGraph& b);

} // namespace flowbench
