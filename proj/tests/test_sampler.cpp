#include <doctest.h>

#include <algorithm>
#include <set>

#include "flowbench/sampler.hpp"
#include "flowbench/util.hpp"

using namespace flowbench;

namespace {

FlowRecord tiny_flow(const std::string& label, uint64_t n)
{
   FlowRecord r;
   r.src_addr = "10.0.0.1";
   r.dst_addr = "10.0.0.2";
   r.src_port = 1000;
   r.dst_port = 80;
   r.protocol = 6;
   r.flow_id = label + "-" + std::to_string(n);
   r.dataset_source = "unit";
   r.label = label;
   r.attack = label != kBenignLabel;
   return r;
}

std::vector<FlowRecord> flows_of(const std::string& label, size_t n)
{
   std::vector<FlowRecord> out;
   for (size_t i = 0; i < n; ++i)
      out.push_back(tiny_flow(label, i));
   return out;
}

std::map<std::string, std::multiset<std::string>> ids_by_class(const std::vector<FlowRecord>& rows)
{
   std::map<std::string, std::multiset<std::string>> m;
   for (const auto& r : rows)
      m[r.label].insert(r.flow_id);
   return m;
}

// Independent transcription of the documented three-branch law.
double oracle_rate(int64_t count, int64_t total, const SamplingConfig& c)
{
   double n = static_cast<double>(count);
   double rate;
   if (n < c.p_rare * static_cast<double>(total))
      rate = std::max(c.rare_floor_rate, c.base_rate * c.rare_multiplier);
   else if (n < c.p_uncommon * static_cast<double>(total))
      rate = std::min(1.0, c.base_rate * c.uncommon_multiplier);
   else
      rate = c.base_rate * c.common_multiplier;
   if (count < c.min_class_rows)
      rate = 1.0;
   return std::min(rate, 1.0);
}

} // namespace

TEST_CASE("rate law branches on hand-computed histograms")
{
   SamplingConfig cfg; // defaults: base .05, thresholds .001/.01, multipliers 10/5/1

   SUBCASE("common, uncommon, and small-class override")
   {
      ClassHistogram h;
      h.counts = {{"A", 900000}, {"B", 5000}, {"C", 800}, {"D", 30}};
      h.total = 905830;
      SamplingPlan plan = compute_rates(h, cfg);
      CHECK(plan.theta_rare == doctest::Approx(905.83));
      CHECK(plan.theta_uncommon == doctest::Approx(9058.3));
      // A: common -> 0.05 of 900000
      CHECK(plan.find("A")->rate == doctest::Approx(0.05));
      CHECK(plan.find("A")->expected == 45000);
      // B: uncommon -> min(1, 0.05*5) = 0.25
      CHECK(plan.find("B")->rate == doctest::Approx(0.25));
      CHECK(plan.find("B")->expected == 1250);
      // C: rare by threshold, but 800 < 1000 minimum -> kept in full
      CHECK(plan.find("C")->rate == 1.0);
      CHECK(plan.find("C")->expected == 800);
      CHECK(plan.find("D")->rate == 1.0);
      CHECK(plan.find("D")->expected == 30);
      CHECK(plan.expected_total == 45000 + 1250 + 800 + 30);
   }

   SUBCASE("rare branch applies when a class clears the absolute minimum")
   {
      ClassHistogram h;
      h.counts = {{"A", 9995000}, {"B", 5000}};
      h.total = 10000000; // theta_rare = 10000, so B is rare yet above min_class_rows
      SamplingPlan plan = compute_rates(h, cfg);
      CHECK(plan.find("B")->rate == doctest::Approx(0.5)); // max(0.5, 0.05*10)
      CHECK(plan.find("B")->expected == 2500);
      CHECK(plan.find("A")->rate == doctest::Approx(0.05));
      CHECK(plan.find("A")->expected == 499750);
   }

   SUBCASE("the rare floor dominates a weak boosted base rate")
   {
      cfg.base_rate = 0.01; // boosted rate 0.1 < floor 0.5
      ClassHistogram h;
      h.counts = {{"A", 9995000}, {"B", 5000}};
      h.total = 10000000;
      SamplingPlan plan = compute_rates(h, cfg);
      CHECK(plan.find("B")->rate == doctest::Approx(0.5));
      CHECK(plan.find("A")->rate == doctest::Approx(0.01));
   }

   SUBCASE("boosted rates clamp to one")
   {
      cfg.base_rate = 0.3; // uncommon boost 1.5 -> 1.0
      ClassHistogram h;
      h.counts = {{"A", 900000}, {"B", 5000}};
      h.total = 905000;
      SamplingPlan plan = compute_rates(h, cfg);
      CHECK(plan.find("B")->rate == 1.0);
      CHECK(plan.find("B")->expected == 5000);

      cfg.base_rate = 0.5;
      cfg.common_multiplier = 3.0; // common rate 1.5 -> 1.0
      SamplingPlan plan2 = compute_rates(h, cfg);
      CHECK(plan2.find("A")->rate == 1.0);
      CHECK(plan2.find("A")->expected == 900000);
   }
}

TEST_CASE("expected counts round half away from zero")
{
   SamplingConfig cfg;
   cfg.base_rate = 0.5;
   cfg.p_rare = 0.0;
   cfg.p_uncommon = 1e-12; // everything lands in the common branch
   cfg.min_class_rows = 0;
   ClassHistogram h;
   h.counts = {{"A", 5}, {"B", 15}, {"C", 4}};
   h.total = 24;
   SamplingPlan plan = compute_rates(h, cfg);
   CHECK(plan.find("A")->expected == 3); // 2.5 rounds up
   CHECK(plan.find("B")->expected == 8); // 7.5 rounds up
   CHECK(plan.find("C")->expected == 2); // 2.0 stays
}

TEST_CASE("rate law matches an independent oracle over random configurations")
{
   Rng rng(2024);
   for (int trial = 0; trial < 500; ++trial) {
      SamplingConfig cfg;
      cfg.base_rate = 0.01 + 0.99 * rng.next_double();
      cfg.p_rare = rng.next_double() * 0.01;
      cfg.p_uncommon = cfg.p_rare + 1e-9 + rng.next_double() * 0.05;
      cfg.rare_multiplier = 1.0 + rng.next_double() * 20.0;
      cfg.uncommon_multiplier = 1.0 + rng.next_double() * 10.0;
      cfg.common_multiplier = 0.5 + rng.next_double();
      cfg.rare_floor_rate = 0.05 + 0.9 * rng.next_double();
      cfg.min_class_rows = static_cast<int64_t>(rng.bounded(2000));

      ClassHistogram h;
      size_t classes = 1 + rng.bounded(8);
      for (size_t c = 0; c < classes; ++c) {
         int64_t count = 1 + static_cast<int64_t>(rng.bounded(3000000));
         h.counts["c" + std::to_string(c)] = count;
         h.total += count;
      }
      SamplingPlan plan = compute_rates(h, cfg);
      int64_t expected_total = 0;
      for (const auto& [label, count] : h.counts) {
         const ClassRate* cr = plan.find(label);
         REQUIRE(cr != nullptr);
         double want = oracle_rate(count, h.total, cfg);
         CHECK(cr->rate == doctest::Approx(want).epsilon(1e-15));
         CHECK(cr->rate > 0.0);
         CHECK(cr->rate <= 1.0);
         CHECK(cr->expected == round_half_up(static_cast<double>(count) * want));
         expected_total += cr->expected;
      }
      CHECK(plan.expected_total == expected_total);
   }
}

TEST_CASE("stratified selection draws exact per-class counts")
{
   std::vector<FlowRecord> rows;
   auto benign = flows_of("Benign", 400);
   auto dos = flows_of("DoS", 40);
   auto theft = flows_of("Theft", 3);
   rows.insert(rows.end(), benign.begin(), benign.end());
   rows.insert(rows.end(), dos.begin(), dos.end());
   rows.insert(rows.end(), theft.begin(), theft.end());

   SamplingConfig cfg;
   cfg.base_rate = 0.25;
   cfg.p_rare = 0.02;    // theta_rare = 8.86
   cfg.p_uncommon = 0.2; // theta_uncommon = 88.6
   cfg.min_class_rows = 0;
   cfg.rare_floor_rate = 1.0;
   SamplingPlan plan = compute_rates(class_histogram(rows), cfg);
   CHECK(plan.find("Benign")->expected == 100); // common 0.25
   CHECK(plan.find("DoS")->expected == 40);     // uncommon min(1, 1.25)
   CHECK(plan.find("Theft")->expected == 3);    // rare floor 1.0

   std::vector<FlowRecord> sampled = stratified_sample(rows, plan, 11);
   auto by_class = ids_by_class(sampled);
   CHECK(by_class["Benign"].size() == 100);
   CHECK(by_class["DoS"].size() == 40);
   CHECK(by_class["Theft"].size() == 3);

   SUBCASE("selection is deterministic in the seed and sensitive to it")
   {
      std::vector<FlowRecord> again = stratified_sample(rows, plan, 11);
      REQUIRE(again.size() == sampled.size());
      for (size_t i = 0; i < again.size(); ++i)
         CHECK(again[i].flow_id == sampled[i].flow_id);
      std::vector<FlowRecord> other = stratified_sample(rows, plan, 12);
      CHECK(ids_by_class(other)["Benign"] != by_class["Benign"]);
   }

   SUBCASE("output preserves input order")
   {
      std::map<std::string, size_t> pos;
      for (size_t i = 0; i < rows.size(); ++i)
         pos[rows[i].flow_id] = i;
      for (size_t i = 1; i < sampled.size(); ++i)
         CHECK(pos[sampled[i - 1].flow_id] < pos[sampled[i].flow_id]);
   }

   SUBCASE("expected counts cap at availability")
   {
      std::vector<FlowRecord> fewer(rows.begin(), rows.begin() + 50); // 50 benign only
      std::vector<FlowRecord> s = stratified_sample(fewer, plan, 11);
      CHECK(s.size() == 50); // plan wants 100, data has 50
   }

   SUBCASE("a class outside the plan is an error")
   {
      std::vector<FlowRecord> extra = rows;
      extra.push_back(tiny_flow("Backdoor", 0));
      CHECK_THROWS(stratified_sample(extra, plan, 11));
   }
}

TEST_CASE("chunked selection equals single-pass selection for any chunking")
{
   // 2600 rows across three classes, shuffled together.
   std::vector<FlowRecord> rows;
   auto add = [&](const std::string& label, size_t n) {
      auto f = flows_of(label, n);
      rows.insert(rows.end(), f.begin(), f.end());
   };
   add("Benign", 2000);
   add("DoS", 500);
   add("Reconnaissance", 100);
   Rng shuffler(5);
   shuffler.shuffle(rows);

   SamplingConfig cfg;
   cfg.base_rate = 0.1;
   cfg.p_rare = 0.01;   // theta_rare 26
   cfg.p_uncommon = 0.1; // theta_uncommon 260
   cfg.min_class_rows = 0;
   SamplingPlan plan = compute_rates(class_histogram(rows), cfg);

   std::vector<FlowRecord> whole = stratified_sample(rows, plan, 99);
   auto whole_ids = ids_by_class(whole);

   for (size_t chunk : {size_t(1), size_t(7), size_t(113), size_t(5000)}) {
      ChunkedSampler cs(plan, 99);
      for (size_t at = 0; at < rows.size(); at += chunk) {
         size_t end = std::min(rows.size(), at + chunk);
         cs.add_chunk(std::vector<FlowRecord>(rows.begin() + at, rows.begin() + end));
      }
      std::vector<FlowRecord> got = cs.finish();
      CHECK(ids_by_class(got) == whole_ids);
   }

   SUBCASE("histograms merge additively")
   {
      ClassHistogram parts;
      for (size_t at = 0; at < rows.size(); at += 97) {
         size_t end = std::min(rows.size(), at + 97);
         ClassHistogram h;
         h.add(std::vector<FlowRecord>(rows.begin() + at, rows.begin() + end));
         parts.merge(h);
      }
      ClassHistogram whole_h = class_histogram(rows);
      CHECK(parts.counts == whole_h.counts);
      CHECK(parts.total == whole_h.total);
   }
}

TEST_CASE("sampling config validation rejects broken parameters")
{
   SamplingConfig c;
   CHECK_NOTHROW(c.validate());
   c.base_rate = 0.0;
   CHECK_THROWS(c.validate());
   c = SamplingConfig{};
   c.p_rare = 0.5;
   c.p_uncommon = 0.1;
   CHECK_THROWS(c.validate());
   c = SamplingConfig{};
   c.rare_floor_rate = 1.5;
   CHECK_THROWS(c.validate());
   c = SamplingConfig{};
   c.min_class_rows = -1;
   CHECK_THROWS(c.validate());

   SamplingConfig parsed = SamplingConfig::from_json_text(
       R"({"base_rate": 0.2, "min_class_rows": 50})");
   CHECK(parsed.base_rate == 0.2);
   CHECK(parsed.min_class_rows == 50);
   CHECK(parsed.p_rare == 0.001); // untouched defaults survive
   CHECK_THROWS(SamplingConfig::from_json_text(R"({"base_rate": -1})"));
}
