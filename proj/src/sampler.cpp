#include "flowbench/sampler.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "flowbench/util.hpp"

namespace flowbench {

using nlohmann::json;

void SamplingConfig::validate() const
{
   if (base_rate <= 0.0 || base_rate > 1.0)
      throw std::invalid_argument("base_rate must lie in (0, 1]");
   if (p_rare < 0.0 || p_uncommon < 0.0 || p_rare >= p_uncommon)
      throw std::invalid_argument("rarity fractions must satisfy 0 <= p_rare < p_uncommon");
   if (p_uncommon > 1.0)
      throw std::invalid_argument("p_uncommon must not exceed 1");
   if (rare_multiplier <= 0.0 || uncommon_multiplier <= 0.0 || common_multiplier <= 0.0)
      throw std::invalid_argument("rate multipliers must be positive");
   if (rare_floor_rate <= 0.0 || rare_floor_rate > 1.0)
      throw std::invalid_argument("rare_floor_rate must lie in (0, 1]");
   if (min_class_rows < 0)
      throw std::invalid_argument("min_class_rows must be non-negative");
}

SamplingConfig SamplingConfig::from_json_text(const std::string& text)
{
   json j = json::parse(text);
   SamplingConfig c;
   c.base_rate = j.value("base_rate", c.base_rate);
   c.p_rare = j.value("p_rare", c.p_rare);
   c.p_uncommon = j.value("p_uncommon", c.p_uncommon);
   c.rare_multiplier = j.value("rare_multiplier", c.rare_multiplier);
   c.uncommon_multiplier = j.value("uncommon_multiplier", c.uncommon_multiplier);
   c.common_multiplier = j.value("common_multiplier", c.common_multiplier);
   c.rare_floor_rate = j.value("rare_floor_rate", c.rare_floor_rate);
   c.min_class_rows = j.value("min_class_rows", c.min_class_rows);
   c.validate();
   return c;
}

SamplingConfig SamplingConfig::from_json_file(const std::string& path)
{
   std::ifstream in(path);
   if (!in)
      throw std::runtime_error("cannot open sampling config: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return from_json_text(ss.str());
}

void ClassHistogram::add(const std::vector<FlowRecord>& rows)
{
   for (const auto& r : rows) {
      ++counts[r.label];
      ++total;
   }
}

void ClassHistogram::merge(const ClassHistogram& other)
{
   for (const auto& [label, n] : other.counts)
      counts[label] += n;
   total += other.total;
}

ClassHistogram class_histogram(const std::vector<FlowRecord>& rows)
{
   ClassHistogram h;
   h.add(rows);
   return h;
}

SamplingPlan compute_rates(const ClassHistogram& hist, const SamplingConfig& config)
{
   config.validate();
   SamplingPlan plan;
   plan.config = config;
   plan.total = hist.total;
   plan.theta_rare = config.p_rare * static_cast<double>(hist.total);
   plan.theta_uncommon = config.p_uncommon * static_cast<double>(hist.total);
   for (const auto& [label, count] : hist.counts) {
      double n = static_cast<double>(count);
      double rate;
      if (n < plan.theta_rare)
         rate = std::max(config.rare_floor_rate, config.base_rate * config.rare_multiplier);
      else if (n < plan.theta_uncommon)
         rate = std::min(1.0, config.base_rate * config.uncommon_multiplier);
      else
         rate = config.base_rate * config.common_multiplier;
      // Absolute small-class override takes precedence over everything above.
      if (count < config.min_class_rows)
         rate = 1.0;
      rate = std::min(rate, 1.0);
      if (rate <= 0.0)
         throw std::logic_error("computed retention rate is not positive");
      ClassRate cr;
      cr.label = label;
      cr.count = count;
      cr.rate = rate;
      cr.expected = round_half_up(n * rate);
      plan.expected_total += cr.expected;
      plan.classes.push_back(std::move(cr));
   }
   return plan;
}

const ClassRate* SamplingPlan::find(const std::string& label) const
{
   for (const auto& c : classes)
      if (c.label == label)
         return &c;
   return nullptr;
}

std::string SamplingPlan::to_json() const
{
   json j;
   j["total"] = total;
   j["expected_total"] = expected_total;
   j["theta_rare"] = theta_rare;
   j["theta_uncommon"] = theta_uncommon;
   j["config"] = {{"base_rate", config.base_rate},
                  {"p_rare", config.p_rare},
                  {"p_uncommon", config.p_uncommon},
                  {"rare_multiplier", config.rare_multiplier},
                  {"uncommon_multiplier", config.uncommon_multiplier},
                  {"common_multiplier", config.common_multiplier},
                  {"rare_floor_rate", config.rare_floor_rate},
                  {"min_class_rows", config.min_class_rows}};
   j["classes"] = json::array();
   for (const auto& c : classes)
      j["classes"].push_back({{"class", c.label},
                              {"count", c.count},
                              {"rate", c.rate},
                              {"expected", c.expected}});
   return j.dump(2);
}

void SamplingPlan::save(const std::string& path) const
{
   std::ofstream out(path);
   if (!out)
      throw std::runtime_error("cannot write sampling plan: " + path);
   out << to_json() << "\n";
}

namespace {

// Chunk-order-independent priority; rows with the smallest priorities win.
uint64_t selection_priority(uint64_t seed, const FlowRecord& r)
{
   return splitmix64(seed ^ fnv1a(r.flow_id));
}

} // namespace

std::vector<FlowRecord> stratified_sample(const std::vector<FlowRecord>& rows,
                                          const SamplingPlan& plan, uint64_t seed)
{
   struct Entry {
      uint64_t priority;
      size_t index;
   };
   std::map<std::string, std::vector<Entry>> by_class;
   for (size_t i = 0; i < rows.size(); ++i)
      by_class[rows[i].label].push_back({selection_priority(seed, rows[i]), i});

   std::vector<char> take(rows.size(), 0);
   for (auto& [label, entries] : by_class) {
      const ClassRate* cr = plan.find(label);
      if (!cr)
         throw std::runtime_error("sampling plan does not cover class: " + label);
      size_t k = std::min(static_cast<size_t>(cr->expected), entries.size());
      std::sort(entries.begin(), entries.end(), [&](const Entry& a, const Entry& b) {
         if (a.priority != b.priority)
            return a.priority < b.priority;
         return rows[a.index].flow_id < rows[b.index].flow_id;
      });
      for (size_t i = 0; i < k; ++i)
         take[entries[i].index] = 1;
   }

   std::vector<FlowRecord> out;
   for (size_t i = 0; i < rows.size(); ++i)
      if (take[i])
         out.push_back(rows[i]);
   return out;
}

ChunkedSampler::ChunkedSampler(const SamplingPlan& plan, uint64_t seed)
    : plan_(plan), seed_(seed)
{
}

void ChunkedSampler::add_chunk(const std::vector<FlowRecord>& rows)
{
   auto worse = [](const Candidate& a, const Candidate& b) {
      if (a.priority != b.priority)
         return a.priority < b.priority;
      return a.record.flow_id < b.record.flow_id;
   };
   for (const auto& r : rows) {
      const ClassRate* cr = plan_.find(r.label);
      if (!cr)
         throw std::runtime_error("sampling plan does not cover class: " + r.label);
      size_t k = static_cast<size_t>(cr->expected);
      if (k == 0)
         continue;
      auto& pool = kept_[r.label];
      Candidate c{selection_priority(seed_, r), r};
      if (pool.size() < k) {
         pool.push_back(std::move(c));
         std::push_heap(pool.begin(), pool.end(), worse);
      } else if (worse(c, pool.front())) {
         std::pop_heap(pool.begin(), pool.end(), worse);
         pool.back() = std::move(c);
         std::push_heap(pool.begin(), pool.end(), worse);
      }
   }
}

std::vector<FlowRecord> ChunkedSampler::finish()
{
   std::vector<FlowRecord> out;
   for (auto& [label, pool] : kept_) {
      std::sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
         if (a.priority != b.priority)
            return a.priority < b.priority;
         return a.record.flow_id < b.record.flow_id;
      });
      for (auto& c : pool)
         out.push_back(std::move(c.record));
   }
   kept_.clear();
   return out;
}

} // namespace flowbench
