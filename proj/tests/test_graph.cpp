#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "flowbench/graph.hpp"
#include "flowbench/util.hpp"

using namespace flowbench;

namespace {

FlowRecord flow_between(const std::string& src, const std::string& dst, uint64_t n,
                        const std::string& label = "Benign")
{
   Rng rng(derive_seed(7000, "g" + std::to_string(n)));
   FlowRecord r;
   r.src_addr = src;
   r.dst_addr = dst;
   r.src_port = static_cast<uint16_t>(1024 + rng.bounded(60000));
   r.dst_port = 8883;
   r.protocol = 6;
   r.l7_proto = 222;
   r.in_bytes = static_cast<int64_t>(rng.bounded(100000));
   r.out_bytes = static_cast<int64_t>(rng.bounded(100000));
   r.in_pkts = static_cast<int64_t>(1 + rng.bounded(1000));
   r.out_pkts = static_cast<int64_t>(rng.bounded(1000));
   r.tcp_flags = 27;
   r.flow_duration_ms = static_cast<int64_t>(rng.bounded(600000));
   r.flow_id = "g-" + std::to_string(n);
   r.dataset_source = "unit";
   r.label = label;
   r.attack = label != kBenignLabel;
   return r;
}

std::vector<FlowRecord> random_flows(uint64_t seed, size_t n, size_t ip_pool)
{
   Rng rng(seed);
   std::vector<FlowRecord> flows;
   for (size_t i = 0; i < n; ++i) {
      std::string src = "10.0.0." + std::to_string(rng.bounded(ip_pool));
      std::string dst = "10.0.1." + std::to_string(rng.bounded(ip_pool));
      flows.push_back(flow_between(src, dst, seed * 100000 + i,
                                   rng.bounded(4) == 0 ? "DoS" : "Benign"));
   }
   return flows;
}

} // namespace

TEST_CASE("graph construction matches a first-appearance oracle")
{
   std::vector<FlowRecord> flows = {
       flow_between("10.0.0.1", "10.0.0.2", 0),
       flow_between("10.0.0.2", "10.0.0.1", 1),
       flow_between("10.0.0.1", "10.0.0.2", 2), // parallel edge
       flow_between("10.0.0.3", "10.0.0.2", 3, "DoS"),
   };
   ScalerStats stats = fit_scaler(flows, default_feature_names());
   CommGraph g = build_graph(flows, stats);

   // Oracle: nodes in first-appearance order scanning src then dst per flow.
   CHECK(g.node_ips == std::vector<std::string>{"10.0.0.1", "10.0.0.2", "10.0.0.3"});
   CHECK(g.node_count() == 3);
   REQUIRE(g.edge_count() == 4);
   CHECK(g.edges[0].src == 0);
   CHECK(g.edges[0].dst == 1);
   CHECK(g.edges[1].src == 1);
   CHECK(g.edges[1].dst == 0);
   CHECK(g.edges[2].src == 0);
   CHECK(g.edges[2].dst == 1); // multigraph keeps the duplicate
   CHECK(g.edges[3].src == 2);
   CHECK(g.edges[3].dst == 1);
   CHECK(g.edges[3].attack);
   CHECK(g.edges[3].label == "DoS");
   for (const auto& e : g.edges)
      CHECK(e.provenance == Provenance::Original);

   // Edge features are the scaled flow features in schema order.
   FeatureMatrix scaled = apply_scaler(flows, stats);
   for (size_t i = 0; i < flows.size(); ++i)
      CHECK(g.edges[i].features == scaled.rows[i]);
   CHECK(g.feature_names == default_feature_names());

   // Node features are uniform constants of the default width.
   CHECK(g.node_feature_width() == kDefaultNodeFeatureWidth);
   for (const auto& nf : g.node_features) {
      REQUIRE(nf.size() == static_cast<size_t>(kDefaultNodeFeatureWidth));
      for (double v : nf)
         CHECK(v == 1.0);
   }
}

TEST_CASE("random graphs satisfy structural invariants")
{
   Rng rng(31);
   for (int trial = 0; trial < 30; ++trial) {
      std::vector<FlowRecord> flows = random_flows(1000 + trial, 50 + rng.bounded(200), 20);
      ScalerStats stats = fit_scaler(flows, default_feature_names());
      CommGraph g = build_graph(flows, stats, 4);

      // Distinct-address oracle.
      std::set<std::string> ips;
      for (const auto& f : flows) {
         ips.insert(f.src_addr);
         ips.insert(f.dst_addr);
      }
      CHECK(g.node_ips.size() == ips.size());
      CHECK(g.edges.size() == flows.size());
      CHECK(g.node_feature_width() == 4);
      for (size_t i = 0; i < g.node_ips.size(); ++i)
         CHECK(g.node_index.at(g.node_ips[i]) == static_cast<int>(i));
      for (const auto& e : g.edges) {
         CHECK(e.src >= 0);
         CHECK(e.src < g.node_count());
         CHECK(e.dst >= 0);
         CHECK(e.dst < g.node_count());
      }
   }
}

TEST_CASE("merging unions nodes and concatenates edges")
{
   std::vector<FlowRecord> a = {flow_between("10.0.0.1", "10.0.0.2", 10),
                                flow_between("10.0.0.2", "10.0.0.3", 11)};
   std::vector<FlowRecord> b = {flow_between("10.0.0.3", "10.0.0.1", 12, "DoS"),
                                flow_between("10.0.0.4", "10.0.0.1", 13)};
   std::vector<FlowRecord> all = a;
   all.insert(all.end(), b.begin(), b.end());
   ScalerStats stats = fit_scaler(all, default_feature_names());

   CommGraph ga = build_graph(a, stats);
   CommGraph gb = build_graph(b, stats);
   std::vector<CommGraph> parts = {ga, gb};
   CommGraph merged = merge_graphs(parts);

   // Node set is the union; every edge keeps its endpoints by address.
   std::set<std::string> ips(merged.node_ips.begin(), merged.node_ips.end());
   CHECK(ips == std::set<std::string>{"10.0.0.1", "10.0.0.2", "10.0.0.3", "10.0.0.4"});
   REQUIRE(merged.edge_count() == 4);
   for (int i = 0; i < merged.edge_count(); ++i) {
      const GraphEdge& e = merged.edges[i];
      const std::vector<FlowRecord>& src_set = i < 2 ? a : b;
      const FlowRecord& f = src_set[i % 2];
      CHECK(merged.node_ips[e.src] == f.src_addr);
      CHECK(merged.node_ips[e.dst] == f.dst_addr);
      CHECK(e.flow_id == f.flow_id);
   }

   SUBCASE("merge equals building from concatenated flows")
   {
      CommGraph direct = build_graph(all, stats);
      CHECK(graph_equal(merged, direct));
   }

   SUBCASE("schema mismatches are rejected")
   {
      CommGraph odd = build_graph(b, fit_scaler(b, {"IN_BYTES"}));
      std::vector<CommGraph> bad = {ga, odd};
      CHECK_THROWS(merge_graphs(bad));
   }
}

TEST_CASE("graph CSV round-trip preserves structure and features exactly")
{
   std::vector<FlowRecord> flows = random_flows(77, 120, 12);
   ScalerStats stats = fit_scaler(flows, default_feature_names());
   CommGraph g = build_graph(flows, stats);
   g.edges[5].provenance = Provenance::Synthetic; // exercise both provenance values

   namespace fs = std::filesystem;
   fs::path dir = fs::temp_directory_path() / "flowbench-graph-test";
   fs::create_directories(dir);
   std::string nodes = (dir / "nodes.csv").string();
   std::string edges = (dir / "edges.csv").string();
   write_graph_csv(g, nodes, edges);
   CommGraph back = read_graph_csv(nodes, edges, stats);

   CHECK(graph_equal(g, back));
   REQUIRE(back.edge_count() == g.edge_count());
   for (int i = 0; i < g.edge_count(); ++i) {
      CHECK(back.edges[i].features == g.edges[i].features); // bit-exact doubles
      CHECK(back.edges[i].provenance == g.edges[i].provenance);
      CHECK(back.edges[i].attack == g.edges[i].attack);
   }
   fs::remove_all(dir);
}

TEST_CASE("graph equality detects every kind of difference")
{
   std::vector<FlowRecord> flows = random_flows(5, 30, 8);
   ScalerStats stats = fit_scaler(flows, default_feature_names());
   CommGraph g = build_graph(flows, stats);
   CHECK(graph_equal(g, g));

   CommGraph h = g;
   h.edges[0].features[0] += 1e-15;
   CHECK_FALSE(graph_equal(g, h));
   h = g;
   h.edges.pop_back();
   CHECK_FALSE(graph_equal(g, h));
   h = g;
   h.node_ips.push_back("10.9.9.9");
   h.node_index["10.9.9.9"] = h.node_count() - 1;
   h.node_features.push_back(std::vector<double>(kDefaultNodeFeatureWidth, 1.0));
   CHECK_FALSE(graph_equal(g, h));
   h = g;
   h.edges[2].label = "Other";
   CHECK_FALSE(graph_equal(g, h));
   h = g;
   h.edges[1].provenance = Provenance::Synthetic;
   CHECK_FALSE(graph_equal(g, h));
}

TEST_CASE("provenance names round-trip")
{
   CHECK(provenance_name(Provenance::Original) == std::string("original"));
   CHECK(provenance_name(Provenance::Synthetic) == std::string("synthetic"));
   CHECK(provenance_from_name("original") == Provenance::Original);
   CHECK(provenance_from_name("synthetic") == Provenance::Synthetic);
   CHECK_THROWS(provenance_from_name("neither"));
}
