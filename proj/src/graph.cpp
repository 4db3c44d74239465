#include "flowbench/graph.hpp"

#include <charconv>
#include <stdexcept>

namespace flowbench {

const char* provenance_name(Provenance p)
{
   return p == Provenance::Original ? "original" : "synthetic";
}

Provenance provenance_from_name(const std::string& name)
{
   if (name == "original")
      return Provenance::Original;
   if (name == "synthetic")
      return Provenance::Synthetic;
   throw std::invalid_argument("unknown provenance: " + name);
}

int CommGraph::intern_node(const std::string& ip, int width)
{
   auto it = node_index.find(ip);
   if (it != node_index.end())
      return it->second;
   int id = static_cast<int>(node_ips.size());
   node_index.emplace(ip, id);
   node_ips.push_back(ip);
   node_features.emplace_back(width, 1.0);
   return id;
}

CommGraph build_graph(const std::vector<FlowRecord>& flows, const ScalerStats& stats,
                      int node_feature_width)
{
   if (node_feature_width <= 0)
      throw std::invalid_argument("node feature width must be positive");
   CommGraph g;
   g.feature_names = stats.feature_names;
   g.stats = stats;
   FeatureMatrix scaled = apply_scaler(flows, stats);
   g.edges.reserve(flows.size());
   for (size_t i = 0; i < flows.size(); ++i) {
      const FlowRecord& r = flows[i];
      GraphEdge e;
      e.src = g.intern_node(r.src_addr, node_feature_width);
      e.dst = g.intern_node(r.dst_addr, node_feature_width);
      e.features = std::move(scaled.rows[i]);
      e.flow_id = r.flow_id;
      e.label = r.label;
      e.attack = r.attack;
      e.provenance = Provenance::Original;
      e.dataset_source = r.dataset_source;
      g.edges.push_back(std::move(e));
   }
   return g;
}

CommGraph merge_graphs(std::span<const CommGraph> graphs)
{
   if (graphs.empty())
      throw std::invalid_argument("nothing to merge");
   CommGraph out;
   out.feature_names = graphs.front().feature_names;
   out.stats = graphs.front().stats;
   int width = graphs.front().node_feature_width();
   if (width <= 0)
      width = kDefaultNodeFeatureWidth;
   for (const auto& g : graphs) {
      if (g.feature_names != out.feature_names)
         throw std::invalid_argument("cannot merge graphs with different feature schemas");
      for (const auto& e : g.edges) {
         GraphEdge copy = e;
         copy.src = out.intern_node(g.node_ips[e.src], width);
         copy.dst = out.intern_node(g.node_ips[e.dst], width);
         out.edges.push_back(std::move(copy));
      }
      // Isolated nodes survive the merge too.
      for (const auto& ip : g.node_ips)
         out.intern_node(ip, width);
   }
   return out;
}

void write_graph_csv(const CommGraph& g, const std::string& nodes_path,
                     const std::string& edges_path)
{
   csv::Table nodes;
   nodes.header = {"node_id", "ip"};
   for (size_t i = 0; i < g.node_ips.size(); ++i)
      nodes.rows.push_back({std::to_string(i), g.node_ips[i]});
   csv::write_file(nodes_path, nodes);

   csv::Table edges;
   edges.header = {"src_id", "dst_id", "flow_id", "provenance", "label"};
   for (const auto& f : g.feature_names)
      edges.header.push_back(f);
   for (const auto& e : g.edges) {
      std::vector<std::string> row = {std::to_string(e.src), std::to_string(e.dst),
                                      e.flow_id, provenance_name(e.provenance), e.label};
      for (double v : e.features) {
         char buf[64];
         auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
         row.emplace_back(buf, p);
      }
      edges.rows.push_back(std::move(row));
   }
   csv::write_file(edges_path, edges);
}

CommGraph read_graph_csv(const std::string& nodes_path, const std::string& edges_path,
                         const ScalerStats& stats, int node_feature_width)
{
   CommGraph g;
   g.feature_names = stats.feature_names;
   g.stats = stats;

   csv::Table nodes = csv::read_file(nodes_path);
   int ip_col = nodes.col("ip");
   if (nodes.col("node_id") != 0 || ip_col < 0)
      throw std::runtime_error("malformed nodes CSV: " + nodes_path);
   for (const auto& row : nodes.rows)
      g.intern_node(row.at(ip_col), node_feature_width);

   csv::Table edges = csv::read_file(edges_path);
   for (const auto& name : {"src_id", "dst_id", "flow_id", "provenance", "label"})
      if (edges.col(name) < 0)
         throw std::runtime_error(std::string("missing edge column: ") + name);
   std::vector<int> fcol;
   for (const auto& f : stats.feature_names) {
      int c = edges.col(f);
      if (c < 0)
         throw std::runtime_error("missing edge feature column: " + f);
      fcol.push_back(c);
   }
   for (const auto& row : edges.rows) {
      GraphEdge e;
      e.src = std::stoi(row.at(edges.col("src_id")));
      e.dst = std::stoi(row.at(edges.col("dst_id")));
      if (e.src < 0 || e.src >= g.node_count() || e.dst < 0 || e.dst >= g.node_count())
         throw std::runtime_error("edge endpoint out of range in " + edges_path);
      e.flow_id = row.at(edges.col("flow_id"));
      e.provenance = provenance_from_name(row.at(edges.col("provenance")));
      e.label = row.at(edges.col("label"));
      e.attack = e.label != kBenignLabel;
      for (int c : fcol) {
         const std::string& s = row.at(c);
         double v = 0;
         auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
         if (ec != std::errc() || p != s.data() + s.size())
            throw std::runtime_error("unparseable edge feature value: " + s);
         e.features.push_back(v);
      }
      g.edges.push_back(std::move(e));
   }
   return g;
}

bool graph_equal(const CommGraph& a, const CommGraph& b)
{
   if (a.node_ips != b.node_ips || a.feature_names != b.feature_names)
      return false;
   if (a.node_features != b.node_features)
      return false;
   if (a.edges.size() != b.edges.size())
      return false;
   for (size_t i = 0; i < a.edges.size(); ++i) {
      const GraphEdge& x = a.edges[i];
      const GraphEdge& y = b.edges[i];
      if (x.src != y.src || x.dst != y.dst || x.flow_id != y.flow_id ||
          x.label != y.label || x.attack != y.attack || x.provenance != y.provenance ||
          x.features != y.features)
         return false;
   }
   return true;
}

} // namespace flowbench
