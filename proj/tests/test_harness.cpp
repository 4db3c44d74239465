#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "flowbench/harness.hpp"

using namespace flowbench;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool finite_unit(double v)
{
   return std::isfinite(v) && v >= 0.0 && v <= 1.0;
}

void check_metrics_block(const json& m)
{
   for (const char* k : {"accuracy", "precision_weighted", "precision_attack", "recall",
                         "f1_weighted", "auc"})
      CHECK(finite_unit(m.at(k).get<double>()));
   CHECK(m.at("tp").get<int64_t>() >= 0);
}

RunConfig small_run(const std::string& out_dir)
{
   RunConfig cfg;
   cfg.synth_rate_scale = 0.3;
   cfg.master_seed = 90210;
   cfg.pgd_epsilons = {0.1, 0.5};
   cfg.edge_remove_fractions = {0.2};
   cfg.node_inject_fractions = {0.1, 0.2};
   cfg.out_dir = out_dir;
   return cfg;
}

} // namespace

TEST_CASE("run configuration parses overrides and round-trips")
{
   const char* text = R"({
      "master_seed": 9,
      "synth_rate_scale": 0.5,
      "synth_flood_target": "192.168.2.15",
      "sample": true,
      "sampling": {"base_rate": 0.2},
      "split": {"train_fraction": 0.6, "stratify_on": "Attack"},
      "detector": {"hidden": 4, "epochs": 20, "learning_rate": 0.1},
      "features": ["IN_BYTES", "OUT_BYTES"],
      "node_feature_width": 3,
      "pgd_epsilons": [0.1],
      "edge_remove_fractions": [],
      "node_inject_fractions": [0.3],
      "pgd_steps": 4,
      "mitigation": {"threshold": 0.7, "parallelism": 2, "model_name": "m1"},
      "mitigation_remote": false,
      "eval_original_edges_only": true,
      "out_dir": "somewhere"
   })";
   RunConfig c = RunConfig::from_json_text(text);
   CHECK(c.master_seed == 9);
   CHECK(c.synth_rate_scale == 0.5);
   CHECK(c.synth_flood_target == "192.168.2.15");
   CHECK(c.sample);
   CHECK(c.sampling.base_rate == 0.2);
   CHECK(c.sampling.p_rare == 0.001); // unset keys keep defaults
   CHECK(c.split.train_fraction == 0.6);
   CHECK(c.split.stratify_on == "Attack");
   CHECK(c.detector.hidden == 4);
   CHECK(c.detector.epochs == 20);
   CHECK(c.features == std::vector<std::string>{"IN_BYTES", "OUT_BYTES"});
   CHECK(c.node_feature_width == 3);
   CHECK(c.pgd_epsilons == std::vector<double>{0.1});
   CHECK(c.edge_remove_fractions.empty());
   CHECK(c.node_inject_fractions == std::vector<double>{0.3});
   CHECK(c.pgd_steps == 4);
   CHECK(c.mitigation.threshold == 0.7);
   CHECK(c.mitigation.parallelism == 2);
   CHECK(c.mitigation.model_name == "m1");
   CHECK(c.eval_original_edges_only);
   CHECK(c.out_dir == "somewhere");

   RunConfig back = RunConfig::from_json_text(c.to_json().dump());
   CHECK(back.master_seed == c.master_seed);
   CHECK(back.synth_rate_scale == c.synth_rate_scale);
   CHECK(back.sampling.base_rate == c.sampling.base_rate);
   CHECK(back.split.train_fraction == c.split.train_fraction);
   CHECK(back.detector.hidden == c.detector.hidden);
   CHECK(back.features == c.features);
   CHECK(back.pgd_epsilons == c.pgd_epsilons);
   CHECK(back.node_inject_fractions == c.node_inject_fractions);
   CHECK(back.mitigation.threshold == c.mitigation.threshold);
   CHECK(back.eval_original_edges_only == c.eval_original_edges_only);
}

TEST_CASE("the four-step protocol produces a complete reproducible report")
{
   fs::path dir = fs::temp_directory_path() / "flowbench-harness-test";
   fs::remove_all(dir);
   RunConfig cfg = small_run((dir / "run").string());
   RunResult res = run_protocol(cfg);

   REQUIRE(res.ok);
   CHECK(res.report.at("errors").empty());

   // Step 1: one baseline per synthesized capture session.
   const json& baseline = res.report.at("baseline");
   REQUIRE(baseline.size() == 3);
   std::set<std::string> names;
   for (const auto& b : baseline) {
      names.insert(b.at("dataset").get<std::string>());
      CHECK(b.at("train_edges").get<int>() > 0);
      CHECK(b.at("test_edges").get<int>() > 0);
      check_metrics_block(b.at("metrics"));
      CHECK(b.at("attack_class_recall").is_object());
      CHECK(b.at("attack_class_recall").contains("DoS"));
   }
   CHECK(names == std::set<std::string>{"testbed-s1", "testbed-s2", "testbed-s3"});

   // Step 2: drift covers every ordered pair of distinct sources.
   const json& drift = res.report.at("drift");
   REQUIRE(drift.size() == 6);
   std::set<std::string> pairs;
   for (const auto& d : drift) {
      std::string a = d.at("train").get<std::string>();
      std::string b = d.at("test").get<std::string>();
      CHECK(a != b);
      pairs.insert(a + "->" + b);
      check_metrics_block(d.at("metrics"));
   }
   CHECK(pairs.size() == 6);

   // Step 3: the attack grid ran every configured condition.
   const json& attacks = res.report.at("attacks");
   check_metrics_block(attacks.at("clean"));
   const json& conditions = attacks.at("conditions");
   REQUIRE(conditions.size() == 5);
   std::map<std::string, json> by_name;
   for (const auto& c : conditions) {
      by_name[c.at("condition").get<std::string>()] = c;
      check_metrics_block(c.at("metrics"));
   }
   REQUIRE(by_name.count("pgd_eps0.1"));
   REQUIRE(by_name.count("pgd_eps0.5"));
   REQUIRE(by_name.count("edge_remove_p0.2"));
   REQUIRE(by_name.count("node_inject_p0.1"));
   REQUIRE(by_name.count("node_inject_p0.2"));

   // Structural consistency: the feature attack keeps the clean shape, the
   // others change it by the documented amounts.
   int clean_edges = by_name["pgd_eps0.1"].at("edges").get<int>();
   int clean_nodes = by_name["pgd_eps0.1"].at("nodes").get<int>();
   CHECK(by_name["edge_remove_p0.2"].at("nodes").get<int>() == clean_nodes);
   CHECK(by_name["edge_remove_p0.2"].at("edges").get<int>() ==
         clean_edges - static_cast<int>(round_half_up(0.2 * clean_edges)));
   int injected = static_cast<int>(round_half_up(0.1 * clean_nodes));
   CHECK(by_name["node_inject_p0.1"].at("nodes").get<int>() == clean_nodes + injected);
   CHECK(by_name["node_inject_p0.1"].at("edges").get<int>() == clean_edges + 5 * injected);

   // Step 4: mitigation ran once per injection condition with full recall.
   const json& mitigation = res.report.at("mitigation");
   REQUIRE(mitigation.size() == 2);
   for (const auto& m : mitigation) {
      CHECK(m.at("condition").get<std::string>().rfind("node_inject_", 0) == 0);
      const json& rep = m.at("report");
      CHECK(rep.at("mitigation_recall").get<double>() == 1.0);
      CHECK(rep.at("correctly_flagged") == rep.at("injected_count"));
      CHECK(rep.at("nodes_after").get<int64_t>() ==
            rep.at("nodes_before").get<int64_t>() - rep.at("correctly_flagged").get<int64_t>() -
                rep.at("incorrectly_flagged").get<int64_t>());
      check_metrics_block(m.at("eval").at("fixed"));
   }

   // Artifacts land in the output directory.
   for (const char* f : {"report.json", "report.csv", "model_unified.json",
                         "model_testbed-s1.json", "manifests/node_inject_p0.1.json",
                         "manifests/pgd_eps0.5.json"})
      CHECK(fs::exists(dir / "run" / f));

   SUBCASE("the flat CSV carries one row per step, condition, and metric")
   {
      csv::Table t = csv::read_file((dir / "run" / "report.csv").string());
      REQUIRE(t.header == std::vector<std::string>{"step", "condition", "metric", "value"});
      size_t baseline_rows = 0, recall_rows = 0;
      for (const auto& row : t.rows) {
         if (row[0] == "baseline")
            ++baseline_rows;
         if (row[0] == "mitigation" && row[2] == "mitigation_recall") {
            ++recall_rows;
            CHECK(std::stod(row[3]) == 1.0);
         }
      }
      CHECK(baseline_rows == 3 * 6); // three datasets, six metric rows each
      CHECK(recall_rows == 2);
   }

   SUBCASE("a second run is byte-identical apart from the timestamp")
   {
      RunResult again = run_protocol(cfg);
      REQUIRE(again.ok);
      json a = res.report;
      json b = again.report;
      a["meta"].erase("timestamp");
      b["meta"].erase("timestamp");
      CHECK(a == b);
   }

   fs::remove_all(dir);
}

TEST_CASE("a missing input is reported as a load failure")
{
   fs::path dir = fs::temp_directory_path() / "flowbench-harness-fail";
   RunConfig cfg;
   cfg.out_dir = (dir / "run").string();
   cfg.datasets.push_back({"ghost", "/nonexistent/flows.csv", ""});
   RunResult res = run_protocol(cfg);
   CHECK_FALSE(res.ok);
   REQUIRE_FALSE(res.report.at("errors").empty());
   CHECK(res.report["errors"][0].at("stage").get<std::string>() == "load");
   fs::remove_all(dir);
}

TEST_CASE("report emission writes valid JSON and CSV for partial reports")
{
   fs::path dir = fs::temp_directory_path() / "flowbench-emit-test";
   fs::create_directories(dir);
   json report;
   report["baseline"] = json::array();
   Metrics m;
   m.accuracy = 0.5;
   m.auc = 0.25;
   report["baseline"].push_back({{"dataset", "d1"}, {"metrics", metrics_json(m)}});
   std::string jp = (dir / "r.json").string();
   std::string cp = (dir / "r.csv").string();
   emit_report(report, jp, cp);

   std::ifstream in(jp);
   json back = json::parse(in);
   CHECK(back["baseline"][0]["dataset"] == "d1");
   csv::Table t = csv::read_file(cp);
   REQUIRE(t.rows.size() == 6);
   CHECK(t.rows[0][0] == "baseline");
   CHECK(t.rows[0][1] == "d1");
   CHECK(t.rows[0][2] == "accuracy");
   CHECK(t.rows[0][3] == "0.5");
   fs::remove_all(dir);
}
