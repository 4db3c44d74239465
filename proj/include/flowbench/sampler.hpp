#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "flowbench/flow.hpp"

namespace flowbench {

// Parameters of the adaptive per-class rate law. Rarity thresholds are
// fractions of the dataset size; multipliers boost the base retention rate
// for rarer classes, and classes below min_class_rows are kept in full.
struct SamplingConfig {
   double base_rate = 0.05;
   double p_rare = 0.001;
   double p_uncommon = 0.01;
   double rare_multiplier = 10.0;
   double uncommon_multiplier = 5.0;
   double common_multiplier = 1.0;
   double rare_floor_rate = 0.5;
   int64_t min_class_rows = 1000;

   void validate() const;
   static SamplingConfig from_json_file(const std::string& path);
   static SamplingConfig from_json_text(const std::string& text);
};

struct ClassHistogram {
   std::map<std::string, int64_t> counts;
   int64_t total = 0;

   void add(const std::vector<FlowRecord>& rows);
   void merge(const ClassHistogram& other);
};

ClassHistogram class_histogram(const std::vector<FlowRecord>& rows);

struct ClassRate {
   std::string label;
   int64_t count = 0;
   double rate = 1.0;
   int64_t expected = 0; // round(count * rate), half-up
};

struct SamplingPlan {
   std::vector<ClassRate> classes; // sorted by label
   int64_t total = 0;
   int64_t expected_total = 0;
   double theta_rare = 0.0;
   double theta_uncommon = 0.0;
   SamplingConfig config;

   const ClassRate* find(const std::string& label) const;
   std::string to_json() const;
   void save(const std::string& path) const;
};

// Per-class retention rate:
//   count < theta_rare      -> max(rare_floor_rate, base * rare_multiplier)
//   count < theta_uncommon  -> min(1, base * uncommon_multiplier)
//   otherwise               -> base * common_multiplier
// then rate 1.0 for classes below min_class_rows, and a final clamp to (0, 1].
SamplingPlan compute_rates(const ClassHistogram& hist, const SamplingConfig& config);

// Draws exactly round(count * rate) rows per class (capped by availability
// when the plan disagrees with the data). Selection keys on (seed, flow_id),
// so any chunking of the input yields the same multiset.
std::vector<FlowRecord> stratified_sample(const std::vector<FlowRecord>& rows,
                                          const SamplingPlan& plan, uint64_t seed);

// Incremental front-end over the same selection rule.
class ChunkedSampler {
 public:
   ChunkedSampler(const SamplingPlan& plan, uint64_t seed);
   void add_chunk(const std::vector<FlowRecord>& rows);
   std::vector<FlowRecord> finish();

 private:
   struct Candidate {
      uint64_t priority;
      FlowRecord record;
   };
   SamplingPlan plan_;
   uint64_t seed_;
   std::map<std::string, std::vector<Candidate>> kept_; // bounded per-class pools
};

} // namespace flowbench
