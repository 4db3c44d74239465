#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flowbench/attacks.hpp"
#include "flowbench/detector.hpp"
#include "flowbench/graph.hpp"

namespace flowbench {

// Raw-space digest of a set of edges: per key feature, mean/min/max.
struct FeatureDigest {
   int edge_count = 0;
   std::vector<std::string> names;
   std::vector<double> mean, min, max;
};

struct NeighborDigest {
   std::string ip;
   int edge_count = 0;
   double volume = 0.0; // total raw bytes across connecting edges
   FeatureDigest digest;
};

// Human-readable evidence pack for one node, phrased in raw feature space so
// an analyst sees bytes and packets rather than z-scores.
struct NodeSummary {
   int node = 0;
   std::string ip;
   int total_graph_nodes = 0;
   int original_in = 0, original_out = 0;
   int synthetic_in = 0, synthetic_out = 0;
   FeatureDigest inbound, outbound;
   std::vector<NeighborDigest> top_neighbors;

   int incident_total() const
   {
      return original_in + original_out + synthetic_in + synthetic_out;
   }
   int incident_synthetic() const { return synthetic_in + synthetic_out; }

   std::string render_user_content() const;
};

NodeSummary summarize_node(const CommGraph& graph, int node, int top_neighbors = 20);

// System prompt sent with every node query; {num_total_nodes} is substituted.
std::string analyst_system_prompt(int num_total_nodes);

// Finds the first decimal literal in [0, 1] in free-form analyst output.
std::optional<double> parse_confidence(const std::string& response);

class AnalystClient {
 public:
   virtual ~AnalystClient() = default;
   // Returns the analyst's textual response, or nullopt on transport failure.
   virtual std::optional<std::string> analyze(const NodeSummary& summary,
                                              const std::string& system_prompt,
                                              const std::string& user_content) = 0;
};

// Offline analyst: confidence equals the synthetic share of the node's
// incident edges, rendered as parseable text.
class HeuristicAnalyst : public AnalystClient {
 public:
   std::optional<std::string> analyze(const NodeSummary& summary, const std::string&,
                                      const std::string&) override;
};

struct MitigationConfig {
   double threshold = 0.6;
   int retries = 2;
   int parallelism = 4;
   int top_neighbors = 20;
   std::string endpoint;               // http://host:port/path for the remote analyst
   std::string model_name;
   std::string api_key_env = "FLOWBENCH_API_KEY";
   int timeout_seconds = 60;
};

// Remote analyst speaking JSON over HTTP: request {model, system, user},
// response body text (or JSON with a "text" field) is scanned for the score.
class HttpAnalyst : public AnalystClient {
 public:
   explicit HttpAnalyst(const MitigationConfig& config);
   std::optional<std::string> analyze(const NodeSummary& summary,
                                      const std::string& system_prompt,
                                      const std::string& user_content) override;

 private:
   std::string host_;
   std::string path_;
   std::string model_;
   std::string api_key_;
   int timeout_seconds_;
};

struct AnalystVerdict {
   int node = 0;
   std::string ip;
   double confidence = 0.0;
   std::string response;
};

// One node query with retry on transport failure or unparseable output;
// nullopt means the node stays unanalyzed (and is never flagged).
std::optional<AnalystVerdict> query_analyst(const NodeSummary& summary,
                                            AnalystClient& client, int retries);

struct MitigationReport {
   int64_t nodes_before = 0;
   int64_t nodes_after = 0;
   int64_t correctly_flagged = 0;   // flagged and actually injected
   int64_t incorrectly_flagged = 0; // flagged but original
   int64_t injected_count = 0;
   int64_t unanalyzed = 0;
   double mitigation_recall = 0.0;  // correctly_flagged / injected_count
   double threshold = 0.0;
   std::vector<std::string> flagged_ips;

   std::string to_json() const;
};

// Removes flagged nodes and their incident edges; classification against the
// manifest's injected set fills the correct/incorrect counters.
std::pair<CommGraph, MitigationReport> prune_flagged(const AttackedGraph& attacked,
                                                     const std::vector<AnalystVerdict>& verdicts,
                                                     double threshold,
                                                     int64_t unanalyzed = 0);

struct MitigationResult {
   CommGraph fixed;
   MitigationReport report;
   std::vector<AnalystVerdict> verdicts;
};

// Scores every node of the attacked graph and prunes at the threshold.
MitigationResult run_mitigation(const AttackedGraph& attacked, AnalystClient& client,
                                const MitigationConfig& config);

struct ConditionEval {
   Metrics clean;
   Metrics attacked;
   Metrics fixed;
   bool original_edges_only = false;

   std::string to_json() const;
};

Metrics evaluate_graph(const DetectorModel& model, const CommGraph& graph,
                       bool original_edges_only = false);

// Side-by-side evaluation of one model over the clean, attacked, and fixed
// graphs. With original_edges_only, synthetic edges are excluded from the
// attacked and fixed evaluations.
ConditionEval evaluate_conditions(const DetectorModel& model, const CommGraph& clean,
                                  const CommGraph& attacked, const CommGraph& fixed,
                                  bool original_edges_only = false);

} // namespace flowbench
