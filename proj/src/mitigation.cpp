#include "flowbench/mitigation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include <httplib.h>
#include <json.hpp>

namespace flowbench {

using nlohmann::json;

namespace {

const std::vector<std::string>& key_features()
{
   return default_feature_names();
}

std::string fmt(double v)
{
   char buf[48];
   std::snprintf(buf, sizeof(buf), "%.6g", v);
   return buf;
}

FeatureDigest digest_edges(const CommGraph& g, const std::vector<const GraphEdge*>& edges)
{
   FeatureDigest d;
   for (const auto& name : key_features()) {
      auto it = std::find(g.feature_names.begin(), g.feature_names.end(), name);
      if (it == g.feature_names.end())
         continue;
      size_t j = static_cast<size_t>(it - g.feature_names.begin());
      double sum = 0.0, lo = 0.0, hi = 0.0;
      bool first = true;
      for (const GraphEdge* e : edges) {
         double raw = e->features[j] * g.stats.stdev[j] + g.stats.mean[j];
         sum += raw;
         lo = first ? raw : std::min(lo, raw);
         hi = first ? raw : std::max(hi, raw);
         first = false;
      }
      d.names.push_back(name);
      d.mean.push_back(edges.empty() ? 0.0 : sum / static_cast<double>(edges.size()));
      d.min.push_back(lo);
      d.max.push_back(hi);
   }
   d.edge_count = static_cast<int>(edges.size());
   return d;
}

std::string render_digest(const FeatureDigest& d, const std::string& indent)
{
   std::ostringstream out;
   for (size_t i = 0; i < d.names.size(); ++i)
      out << indent << d.names[i] << ": mean=" << fmt(d.mean[i])
          << " min=" << fmt(d.min[i]) << " max=" << fmt(d.max[i]) << "\n";
   return out.str();
}

} // namespace

NodeSummary summarize_node(const CommGraph& graph, int node, int top_neighbors)
{
   if (node < 0 || node >= graph.node_count())
      throw std::invalid_argument("node index out of range");
   NodeSummary s;
   s.node = node;
   s.ip = graph.node_ips[node];
   s.total_graph_nodes = graph.node_count();

   std::vector<const GraphEdge*> in_edges, out_edges;
   std::map<int, std::vector<const GraphEdge*>> by_neighbor;
   for (const auto& e : graph.edges) {
      if (e.src != node && e.dst != node)
         continue;
      bool outgoing = e.src == node;
      if (outgoing) {
         out_edges.push_back(&e);
         if (e.provenance == Provenance::Synthetic)
            ++s.synthetic_out;
         else
            ++s.original_out;
      } else {
         in_edges.push_back(&e);
         if (e.provenance == Provenance::Synthetic)
            ++s.synthetic_in;
         else
            ++s.original_in;
      }
      by_neighbor[outgoing ? e.dst : e.src].push_back(&e);
   }
   s.inbound = digest_edges(graph, in_edges);
   s.outbound = digest_edges(graph, out_edges);

   for (const auto& [nbr, edges] : by_neighbor) {
      NeighborDigest nd;
      nd.ip = graph.node_ips[nbr];
      nd.edge_count = static_cast<int>(edges.size());
      nd.digest = digest_edges(graph, edges);
      for (size_t i = 0; i < nd.digest.names.size(); ++i)
         if (nd.digest.names[i] == "IN_BYTES" || nd.digest.names[i] == "OUT_BYTES")
            nd.volume += nd.digest.mean[i] * nd.digest.edge_count;
      s.top_neighbors.push_back(std::move(nd));
   }
   std::sort(s.top_neighbors.begin(), s.top_neighbors.end(),
             [](const NeighborDigest& a, const NeighborDigest& b) {
                if (a.volume != b.volume)
                   return a.volume > b.volume;
                return a.ip < b.ip;
             });
   if (static_cast<int>(s.top_neighbors.size()) > top_neighbors)
      s.top_neighbors.resize(top_neighbors);
   return s;
}

std::string NodeSummary::render_user_content() const
{
   std::ostringstream out;
   out << "Node v_" << node << " (" << ip << ")\n";
   out << "Title: " << incident_total() << " incident flows; " << original_in
       << " original in, " << original_out << " original out, " << synthetic_in
       << " synthetic in, " << synthetic_out << " synthetic out\n";
   out << "Raw Traffic:\n";
   out << "  Inbound (" << inbound.edge_count << " flows):\n"
       << render_digest(inbound, "    ");
   out << "  Outbound (" << outbound.edge_count << " flows):\n"
       << render_digest(outbound, "    ");
   out << "Related Traffic (Edges):\n";
   for (const auto& n : top_neighbors) {
      out << "  Neighbor " << n.ip << ": " << n.edge_count << " flows\n"
          << render_digest(n.digest, "    ");
   }
   return out.str();
}

std::string analyst_system_prompt(int num_total_nodes)
{
   static const char* kTemplate =
       "You are an expert cybersecurity analyst reviewing network flow data "
       "represented as a graph. The graph contains {num_total_nodes} nodes (flows) "
       "representing network activity. Some nodes may represent normal activity, "
       "while others could be anomalous or potentially malicious (e.g., part of "
       "DDoS, spoofing, reconnaissance.Your task is to analyze the single node "
       "detailed below. Focus on comparing the node's raw features (if available) "
       "to its neighbors' raw features to assess consistency within its local "
       "neighborhood. Also consider if the node's own raw features (or processed "
       "features if raw are unavailable) seem inherently unusual.Provide a "
       "confidence score (0.0 = consistent/likely normal, 1.0 = "
       "inconsistent/highly likely anomalous) and a brief justification.\n"
       "Key Analysis Points:\n"
       "Raw Feature Consistency: Does the target node's raw feature values align "
       "with its neighbors' raw values? (Primary focus)\n"
       "Unusual Own Features: Does the target node have strange raw feature "
       "combinations (e.g., high packets for low-traffic protocol, impossible "
       "flags)?\n"
       "Connectivity: Does the node connect to neighbors that seem unusually "
       "diverse or disconnected? (Secondary consideration)\n"
       "Key Raw Features (Used for Comparison):\n"
       "'IN_BYTES': \"Incoming bytes\", 'OUT_BYTES': \"Outgoing bytes\", "
       "'IN_PKTS': \"Incoming packets\", 'OUT_PKTS': \"Outgoing packets\", "
       "'FLOW_DURATION_MILLISECONDS': \"Duration of the flow (ms)\", "
       "'PROTOCOL': \"Network protocol (e.g., 6=TCP, 17=UDP)\", "
       "'L7_PROTO': \"Application layer protocol (numeric code)\", "
       "'TCP_FLAGS': \"TCP flags set (numeric code)\"";
   std::string text = kTemplate;
   const std::string key = "{num_total_nodes}";
   size_t pos = text.find(key);
   if (pos != std::string::npos)
      text.replace(pos, key.size(), std::to_string(num_total_nodes));
   return text;
}

std::optional<double> parse_confidence(const std::string& response)
{
   size_t i = 0;
   while (i < response.size()) {
      char c = response[i];
      if (std::isdigit(static_cast<unsigned char>(c)) ||
          (c == '.' && i + 1 < response.size() &&
           std::isdigit(static_cast<unsigned char>(response[i + 1])))) {
         size_t j = i;
         bool seen_dot = false;
         while (j < response.size() &&
                (std::isdigit(static_cast<unsigned char>(response[j])) ||
                 (response[j] == '.' && !seen_dot))) {
            if (response[j] == '.')
               seen_dot = true;
            ++j;
         }
         std::string tok = response.substr(i, j - i);
         if (tok.back() == '.') {
            tok.pop_back();
            --j;
         }
         try {
            double v = std::stod(tok);
            if (v >= 0.0 && v <= 1.0)
               return v;
         } catch (const std::exception&) {
         }
         i = j;
      } else {
         ++i;
      }
   }
   return std::nullopt;
}

std::optional<std::string> HeuristicAnalyst::analyze(const NodeSummary& summary,
                                                     const std::string&,
                                                     const std::string&)
{
   int total = summary.incident_total();
   double conf = total == 0
                     ? 0.0
                     : static_cast<double>(summary.incident_synthetic()) /
                           static_cast<double>(total);
   char buf[160];
   std::snprintf(buf, sizeof(buf),
                 "%.6f confidence: synthetic share of incident flows is %d of %d",
                 conf, summary.incident_synthetic(), total);
   return std::string(buf);
}

HttpAnalyst::HttpAnalyst(const MitigationConfig& config)
    : model_(config.model_name), timeout_seconds_(config.timeout_seconds)
{
   const std::string& url = config.endpoint;
   const std::string scheme = "http://";
   if (url.rfind(scheme, 0) != 0)
      throw std::invalid_argument("analyst endpoint must start with http://");
   size_t host_start = scheme.size();
   size_t path_start = url.find('/', host_start);
   host_ = url.substr(0, path_start == std::string::npos ? url.size() : path_start);
   path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
   if (const char* key = std::getenv(config.api_key_env.c_str()))
      api_key_ = key;
}

std::optional<std::string> HttpAnalyst::analyze(const NodeSummary&,
                                                const std::string& system_prompt,
                                                const std::string& user_content)
{
   httplib::Client client(host_);
   client.set_connection_timeout(timeout_seconds_);
   client.set_read_timeout(timeout_seconds_);
   httplib::Headers headers;
   if (!api_key_.empty())
      headers.emplace("Authorization", "Bearer " + api_key_);
   json body = {{"model", model_}, {"system", system_prompt}, {"user", user_content}};
   auto res = client.Post(path_, headers, body.dump(), "application/json");
   if (!res || res->status < 200 || res->status >= 300)
      return std::nullopt;
   // Accept either a plain-text body or a JSON envelope with a "text" field.
   try {
      json j = json::parse(res->body);
      if (j.is_object() && j.contains("text"))
         return j["text"].get<std::string>();
   } catch (const std::exception&) {
   }
   return res->body;
}

std::optional<AnalystVerdict> query_analyst(const NodeSummary& summary,
                                            AnalystClient& client, int retries)
{
   std::string system = analyst_system_prompt(summary.total_graph_nodes);
   std::string user = summary.render_user_content();
   for (int attempt = 0; attempt <= retries; ++attempt) {
      std::optional<std::string> resp = client.analyze(summary, system, user);
      if (!resp)
         continue;
      std::optional<double> conf = parse_confidence(*resp);
      if (!conf)
         continue;
      AnalystVerdict v;
      v.node = summary.node;
      v.ip = summary.ip;
      v.confidence = *conf;
      v.response = *resp;
      return v;
   }
   return std::nullopt;
}

std::pair<CommGraph, MitigationReport>
prune_flagged(const AttackedGraph& attacked, const std::vector<AnalystVerdict>& verdicts,
              double threshold, int64_t unanalyzed)
{
   const CommGraph& g = attacked.graph;
   std::vector<char> drop(g.node_count(), 0);
   MitigationReport report;
   report.threshold = threshold;
   report.nodes_before = g.node_count();
   report.injected_count = static_cast<int64_t>(attacked.manifest.injected_count());
   report.unanalyzed = unanalyzed;
   for (const auto& v : verdicts) {
      if (v.confidence < threshold)
         continue;
      if (v.node < 0 || v.node >= g.node_count())
         throw std::invalid_argument("verdict references unknown node");
      if (drop[v.node])
         continue;
      drop[v.node] = 1;
      report.flagged_ips.push_back(v.ip);
      if (attacked.manifest.is_injected(v.ip))
         ++report.correctly_flagged;
      else
         ++report.incorrectly_flagged;
   }

   CommGraph fixed;
   fixed.feature_names = g.feature_names;
   fixed.stats = g.stats;
   std::vector<int> remap(g.node_count(), -1);
   for (int i = 0; i < g.node_count(); ++i) {
      if (drop[i])
         continue;
      remap[i] = fixed.node_count();
      fixed.node_index.emplace(g.node_ips[i], remap[i]);
      fixed.node_ips.push_back(g.node_ips[i]);
      fixed.node_features.push_back(g.node_features[i]);
   }
   for (const auto& e : g.edges) {
      if (drop[e.src] || drop[e.dst])
         continue;
      GraphEdge copy = e;
      copy.src = remap[e.src];
      copy.dst = remap[e.dst];
      fixed.edges.push_back(std::move(copy));
   }

   report.nodes_after = fixed.node_count();
   report.mitigation_recall =
       report.injected_count == 0
           ? 1.0
           : static_cast<double>(report.correctly_flagged) /
                 static_cast<double>(report.injected_count);
   return {std::move(fixed), report};
}

MitigationResult run_mitigation(const AttackedGraph& attacked, AnalystClient& client,
                                const MitigationConfig& config)
{
   const CommGraph& g = attacked.graph;
   int n = g.node_count();
   std::vector<std::optional<AnalystVerdict>> results(n);
   int workers = std::max(1, config.parallelism);
   std::atomic<int> next{0};
   auto work = [&]() {
      for (;;) {
         int i = next.fetch_add(1);
         if (i >= n)
            return;
         NodeSummary s = summarize_node(g, i, config.top_neighbors);
         results[i] = query_analyst(s, client, config.retries);
      }
   };
   if (workers == 1) {
      work();
   } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w)
         pool.emplace_back(work);
      for (auto& t : pool)
         t.join();
   }

   MitigationResult out;
   int64_t unanalyzed = 0;
   for (auto& r : results) {
      if (r)
         out.verdicts.push_back(*r);
      else
         ++unanalyzed;
   }
   auto [fixed, report] = prune_flagged(attacked, out.verdicts, config.threshold, unanalyzed);
   out.fixed = std::move(fixed);
   out.report = report;
   return out;
}

Metrics evaluate_graph(const DetectorModel& model, const CommGraph& graph,
                       bool original_edges_only)
{
   std::vector<double> scores = predict(model, graph);
   std::vector<double> use_scores;
   std::vector<char> use_labels;
   for (size_t i = 0; i < graph.edges.size(); ++i) {
      if (original_edges_only && graph.edges[i].provenance != Provenance::Original)
         continue;
      use_scores.push_back(scores[i]);
      use_labels.push_back(graph.edges[i].attack ? 1 : 0);
   }
   return evaluate(use_scores, use_labels);
}

std::string MitigationReport::to_json() const
{
   json j;
   j["nodes_before"] = nodes_before;
   j["nodes_after"] = nodes_after;
   j["correctly_flagged"] = correctly_flagged;
   j["incorrectly_flagged"] = incorrectly_flagged;
   j["injected_count"] = injected_count;
   j["unanalyzed"] = unanalyzed;
   j["mitigation_recall"] = mitigation_recall;
   j["threshold"] = threshold;
   j["flagged_ips"] = flagged_ips;
   return j.dump(2);
}

namespace {

json metrics_to_json(const Metrics& m)
{
   return json{{"accuracy", m.accuracy},
               {"precision_weighted", m.precision_weighted},
               {"precision_attack", m.precision_attack()},
               {"recall", m.recall},
               {"f1_weighted", m.f1_weighted},
               {"auc", m.auc},
               {"tp", m.tp},
               {"fp", m.fp},
               {"tn", m.tn},
               {"fn", m.fn}};
}

} // namespace

std::string ConditionEval::to_json() const
{
   json j;
   j["original_edges_only"] = original_edges_only;
   j["clean"] = metrics_to_json(clean);
   j["attacked"] = metrics_to_json(attacked);
   j["fixed"] = metrics_to_json(fixed);
   j["delta"] = {{"accuracy", attacked.accuracy - clean.accuracy},
                 {"f1_weighted", attacked.f1_weighted - clean.f1_weighted},
                 {"recovered_f1", fixed.f1_weighted - attacked.f1_weighted}};
   return j.dump(2);
}

ConditionEval evaluate_conditions(const DetectorModel& model, const CommGraph& clean,
                                  const CommGraph& attacked, const CommGraph& fixed,
                                  bool original_edges_only)
{
   ConditionEval ev;
   ev.original_edges_only = original_edges_only;
   ev.clean = evaluate_graph(model, clean, false);
   ev.attacked = evaluate_graph(model, attacked, original_edges_only);
   ev.fixed = evaluate_graph(model, fixed, original_edges_only);
   return ev;
}

} // namespace flowbench
