#include "flowbench/harness.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "flowbench/util.hpp"

namespace flowbench {

using nlohmann::json;
namespace fs = std::filesystem;

RunConfig RunConfig::from_json_text(const std::string& text)
{
   json j = json::parse(text);
   RunConfig c;
   if (j.contains("datasets"))
      for (const auto& d : j["datasets"]) {
         DatasetInput in;
         in.name = d.at("name").get<std::string>();
         in.csv_path = d.at("csv_path").get<std::string>();
         in.mapping_path = d.value("mapping_path", std::string());
         c.datasets.push_back(std::move(in));
      }
   c.synth_flood_target = j.value("synth_flood_target", c.synth_flood_target);
   c.synth_rate_scale = j.value("synth_rate_scale", c.synth_rate_scale);
   c.sample = j.value("sample", c.sample);
   if (j.contains("sampling"))
      c.sampling = SamplingConfig::from_json_text(j["sampling"].dump());
   if (j.contains("split")) {
      c.split.train_fraction = j["split"].value("train_fraction", c.split.train_fraction);
      c.split.stratify_on = j["split"].value("stratify_on", c.split.stratify_on);
   }
   if (j.contains("detector")) {
      c.detector.hidden = j["detector"].value("hidden", c.detector.hidden);
      c.detector.epochs = j["detector"].value("epochs", c.detector.epochs);
      c.detector.learning_rate =
          j["detector"].value("learning_rate", c.detector.learning_rate);
   }
   if (j.contains("features"))
      c.features = j["features"].get<std::vector<std::string>>();
   c.node_feature_width = j.value("node_feature_width", c.node_feature_width);
   if (j.contains("pgd_epsilons"))
      c.pgd_epsilons = j["pgd_epsilons"].get<std::vector<double>>();
   if (j.contains("edge_remove_fractions"))
      c.edge_remove_fractions = j["edge_remove_fractions"].get<std::vector<double>>();
   if (j.contains("node_inject_fractions"))
      c.node_inject_fractions = j["node_inject_fractions"].get<std::vector<double>>();
   c.pgd_steps = j.value("pgd_steps", c.pgd_steps);
   if (j.contains("mitigation")) {
      const json& m = j["mitigation"];
      c.mitigation.threshold = m.value("threshold", c.mitigation.threshold);
      c.mitigation.retries = m.value("retries", c.mitigation.retries);
      c.mitigation.parallelism = m.value("parallelism", c.mitigation.parallelism);
      c.mitigation.top_neighbors = m.value("top_neighbors", c.mitigation.top_neighbors);
      c.mitigation.endpoint = m.value("endpoint", c.mitigation.endpoint);
      c.mitigation.model_name = m.value("model_name", c.mitigation.model_name);
      c.mitigation.api_key_env = m.value("api_key_env", c.mitigation.api_key_env);
      c.mitigation.timeout_seconds =
          m.value("timeout_seconds", c.mitigation.timeout_seconds);
   }
   c.mitigation_remote = j.value("mitigation_remote", c.mitigation_remote);
   c.eval_original_edges_only =
       j.value("eval_original_edges_only", c.eval_original_edges_only);
   c.master_seed = j.value("master_seed", c.master_seed);
   c.out_dir = j.value("out_dir", c.out_dir);
   return c;
}

RunConfig RunConfig::from_json_file(const std::string& path)
{
   std::ifstream in(path);
   if (!in)
      throw std::runtime_error("cannot open run config: " + path);
   std::ostringstream ss;
   ss << in.rdbuf();
   return from_json_text(ss.str());
}

json RunConfig::to_json() const
{
   json j;
   j["datasets"] = json::array();
   for (const auto& d : datasets)
      j["datasets"].push_back({{"name", d.name},
                               {"csv_path", d.csv_path},
                               {"mapping_path", d.mapping_path}});
   j["synth_flood_target"] = synth_flood_target;
   j["synth_rate_scale"] = synth_rate_scale;
   j["sample"] = sample;
   j["sampling"] = {{"base_rate", sampling.base_rate},
                    {"p_rare", sampling.p_rare},
                    {"p_uncommon", sampling.p_uncommon},
                    {"rare_multiplier", sampling.rare_multiplier},
                    {"uncommon_multiplier", sampling.uncommon_multiplier},
                    {"common_multiplier", sampling.common_multiplier},
                    {"rare_floor_rate", sampling.rare_floor_rate},
                    {"min_class_rows", sampling.min_class_rows}};
   j["split"] = {{"train_fraction", split.train_fraction},
                 {"stratify_on", split.stratify_on}};
   j["detector"] = {{"hidden", detector.hidden},
                    {"epochs", detector.epochs},
                    {"learning_rate", detector.learning_rate}};
   j["features"] = features;
   j["node_feature_width"] = node_feature_width;
   j["pgd_epsilons"] = pgd_epsilons;
   j["edge_remove_fractions"] = edge_remove_fractions;
   j["node_inject_fractions"] = node_inject_fractions;
   j["pgd_steps"] = pgd_steps;
   j["mitigation"] = {{"threshold", mitigation.threshold},
                      {"retries", mitigation.retries},
                      {"parallelism", mitigation.parallelism},
                      {"top_neighbors", mitigation.top_neighbors},
                      {"endpoint", mitigation.endpoint},
                      {"model_name", mitigation.model_name},
                      {"api_key_env", mitigation.api_key_env}};
   j["mitigation_remote"] = mitigation_remote;
   j["eval_original_edges_only"] = eval_original_edges_only;
   j["master_seed"] = master_seed;
   return j;
}

json metrics_json(const Metrics& m)
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

namespace {

struct Dataset {
   std::string name;
   std::vector<FlowRecord> records;
};

std::vector<Dataset> load_datasets(const RunConfig& cfg, json& report)
{
   std::vector<Dataset> out;
   if (cfg.datasets.empty()) {
      uint64_t seed = derive_seed(cfg.master_seed, "synth");
      for (const auto& session :
           default_sessions(cfg.synth_flood_target, cfg.synth_rate_scale))
         out.push_back({session.name, synthesize_session(session, seed)});
   } else {
      for (const auto& d : cfg.datasets) {
         if (d.mapping_path.empty()) {
            out.push_back({d.name, read_flows_csv(d.csv_path)});
         } else {
            MappingConfig mapping = MappingConfig::from_json_file(d.mapping_path);
            if (mapping.dataset_source.empty())
               mapping.dataset_source = d.name;
            StandardizeResult res =
                standardize_dataset(csv::read_file(d.csv_path), mapping);
            report["ingest"][d.name] = {{"rows", res.records.size()},
                                        {"skipped", res.skipped}};
            out.push_back({d.name, std::move(res.records)});
         }
      }
   }
   if (cfg.sample) {
      for (auto& d : out) {
         SamplingPlan plan = compute_rates(class_histogram(d.records), cfg.sampling);
         report["sampling_plans"][d.name] = json::parse(plan.to_json());
         d.records = stratified_sample(d.records, plan,
                                       derive_seed(cfg.master_seed, "sample:" + d.name));
      }
   }
   return out;
}

struct BaselineArtifacts {
   std::string name;
   ScalerStats stats;
   DetectorModel model;
   CommGraph test_graph;
   std::vector<FlowRecord> all_records;
};

} // namespace

RunResult run_protocol(const RunConfig& config)
{
   RunResult result;
   json& report = result.report;
   report["meta"] = {{"master_seed", config.master_seed},
                     {"config", config.to_json()},
                     {"timestamp", []() {
                         auto now = std::chrono::system_clock::now();
                         auto t = std::chrono::system_clock::to_time_t(now);
                         char buf[32];
                         std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ",
                                       std::gmtime(&t));
                         return std::string(buf);
                      }()}};
   report["errors"] = json::array();
   auto fail = [&](const std::string& stage, const std::exception& e) {
      report["errors"].push_back({{"stage", stage}, {"error", e.what()}});
      result.ok = false;
   };

   fs::create_directories(config.out_dir);
   fs::create_directories(fs::path(config.out_dir) / "manifests");

   // Step 1: per-dataset baselines.
   std::vector<Dataset> datasets;
   try {
      datasets = load_datasets(config, report);
      if (datasets.empty())
         throw std::runtime_error("no datasets configured");
   } catch (const std::exception& e) {
      fail("load", e);
      return result;
   }

   report["baseline"] = json::array();
   std::vector<BaselineArtifacts> base;
   for (const auto& d : datasets) {
      try {
         SplitSpec split = config.split;
         split.seed = derive_seed(config.master_seed, "split:" + d.name);
         auto [train, test] = split_stratified(d.records, split);
         ScalerStats stats = fit_scaler(train, config.features);
         CommGraph train_graph = build_graph(train, stats, config.node_feature_width);
         DetectorConfig dc = config.detector;
         dc.seed = derive_seed(config.master_seed, "train:" + d.name);
         DetectorModel model = train_detector(train_graph, dc);
         CommGraph test_graph = build_graph(test, stats, config.node_feature_width);
         std::vector<double> scores = predict(model, test_graph);
         std::vector<char> labels = edge_labels(test_graph);
         Metrics m = evaluate(scores, labels);
         std::vector<std::string> classes;
         for (const auto& e : test_graph.edges)
            classes.push_back(e.label);
         json pcr = json::object();
         for (const auto& [cls, rec] : per_class_recall(scores, labels, classes))
            pcr[cls] = rec;
         report["baseline"].push_back({{"dataset", d.name},
                                       {"train_edges", train_graph.edge_count()},
                                       {"test_edges", test_graph.edge_count()},
                                       {"metrics", metrics_json(m)},
                                       {"attack_class_recall", pcr}});
         model.save((fs::path(config.out_dir) / ("model_" + d.name + ".json")).string());
         base.push_back({d.name, stats, std::move(model), std::move(test_graph),
                         d.records});
      } catch (const std::exception& e) {
         fail("baseline:" + d.name, e);
      }
   }

   // Step 2: cross-dataset drift over all ordered pairs.
   report["drift"] = json::array();
   for (const auto& a : base) {
      for (const auto& b : base) {
         if (a.name == b.name)
            continue;
         try {
            CommGraph g = build_graph(b.all_records, a.stats, config.node_feature_width);
            Metrics m = evaluate_graph(a.model, g);
            report["drift"].push_back({{"train", a.name},
                                       {"test", b.name},
                                       {"metrics", metrics_json(m)}});
         } catch (const std::exception& e) {
            fail("drift:" + a.name + "->" + b.name, e);
         }
      }
   }

   // Step 3: attack grid against the unified-trained model.
   DetectorModel unified_model;
   CommGraph clean_test;
   bool unified_ok = false;
   try {
      std::vector<FlowRecord> all;
      for (const auto& d : datasets)
         all.insert(all.end(), d.records.begin(), d.records.end());
      SplitSpec split = config.split;
      split.seed = derive_seed(config.master_seed, "split:unified");
      auto [train, test] = split_stratified(all, split);
      ScalerStats stats = fit_scaler(train, config.features);
      CommGraph train_graph = build_graph(train, stats, config.node_feature_width);
      DetectorConfig dc = config.detector;
      dc.seed = derive_seed(config.master_seed, "train:unified");
      unified_model = train_detector(train_graph, dc);
      unified_model.save((fs::path(config.out_dir) / "model_unified.json").string());
      clean_test = build_graph(test, stats, config.node_feature_width);
      report["attacks"]["clean"] = metrics_json(evaluate_graph(unified_model, clean_test));
      unified_ok = true;
   } catch (const std::exception& e) {
      fail("unified", e);
   }

   std::vector<AttackConfig> grid;
   for (double eps : config.pgd_epsilons) {
      AttackConfig a;
      a.kind = AttackKind::PgdFeature;
      a.epsilon = eps;
      a.steps = config.pgd_steps;
      grid.push_back(a);
   }
   for (double p : config.edge_remove_fractions) {
      AttackConfig a;
      a.kind = AttackKind::EdgeRemove;
      a.fraction = p;
      grid.push_back(a);
   }
   for (double p : config.node_inject_fractions) {
      AttackConfig a;
      a.kind = AttackKind::NodeInject;
      a.fraction = p;
      grid.push_back(a);
   }

   report["attacks"]["conditions"] = json::array();
   std::vector<std::pair<AttackConfig, AttackedGraph>> injected_conditions;
   if (unified_ok) {
      for (AttackConfig a : grid) {
         std::string condition;
         try {
            a.seed = derive_seed(config.master_seed, "attack:" + a.condition_name());
            condition = a.condition_name();
            AttackedGraph attacked = apply_attack(clean_test, &unified_model, a);
            std::string manifest_rel = "manifests/" + condition + ".json";
            attacked.manifest.save((fs::path(config.out_dir) / manifest_rel).string());
            Metrics m = evaluate_graph(unified_model, attacked.graph,
                                       config.eval_original_edges_only);
            report["attacks"]["conditions"].push_back(
                {{"condition", condition},
                 {"kind", attack_kind_name(a.kind)},
                 {"metrics", metrics_json(m)},
                 {"manifest", manifest_rel},
                 {"edges", attacked.graph.edge_count()},
                 {"nodes", attacked.graph.node_count()}});
            if (a.kind == AttackKind::NodeInject)
               injected_conditions.emplace_back(a, std::move(attacked));
         } catch (const std::exception& e) {
            fail("attack:" + condition, e);
         }
      }
   }

   // Step 4: analyst mitigation for every injection condition.
   report["mitigation"] = json::array();
   for (auto& [a, attacked] : injected_conditions) {
      std::string condition = a.condition_name();
      try {
         std::unique_ptr<AnalystClient> client;
         if (config.mitigation_remote)
            client = std::make_unique<HttpAnalyst>(config.mitigation);
         else
            client = std::make_unique<HeuristicAnalyst>();
         MitigationResult mit = run_mitigation(attacked, *client, config.mitigation);
         ConditionEval ev =
             evaluate_conditions(unified_model, clean_test, attacked.graph, mit.fixed,
                                 config.eval_original_edges_only);
         report["mitigation"].push_back(
             {{"condition", condition},
              {"report", json::parse(mit.report.to_json())},
              {"eval", json::parse(ev.to_json())}});
      } catch (const std::exception& e) {
         fail("mitigation:" + condition, e);
      }
   }

   emit_report(report, (fs::path(config.out_dir) / "report.json").string(),
               (fs::path(config.out_dir) / "report.csv").string());
   return result;
}

namespace {

void metric_rows(csv::Table& t, const std::string& step, const std::string& condition,
                 const json& metrics)
{
   for (const char* name : {"accuracy", "precision_weighted", "precision_attack",
                            "recall", "f1_weighted", "auc"}) {
      if (!metrics.contains(name))
         continue;
      char buf[48];
      std::snprintf(buf, sizeof(buf), "%.12g", metrics[name].get<double>());
      t.rows.push_back({step, condition, name, buf});
   }
}

} // namespace

void emit_report(const json& report, const std::string& json_path,
                 const std::string& csv_path)
{
   {
      std::ofstream out(json_path);
      if (!out)
         throw std::runtime_error("cannot write report: " + json_path);
      out << report.dump(2) << "\n";
   }
   csv::Table t;
   t.header = {"step", "condition", "metric", "value"};
   if (report.contains("baseline"))
      for (const auto& b : report["baseline"])
         metric_rows(t, "baseline", b["dataset"].get<std::string>(), b["metrics"]);
   if (report.contains("drift"))
      for (const auto& d : report["drift"])
         metric_rows(t, "drift",
                     d["train"].get<std::string>() + "->" + d["test"].get<std::string>(),
                     d["metrics"]);
   if (report.contains("attacks")) {
      if (report["attacks"].contains("clean"))
         metric_rows(t, "attack", "clean", report["attacks"]["clean"]);
      if (report["attacks"].contains("conditions"))
         for (const auto& c : report["attacks"]["conditions"])
            metric_rows(t, "attack", c["condition"].get<std::string>(), c["metrics"]);
   }
   if (report.contains("mitigation"))
      for (const auto& m : report["mitigation"]) {
         std::string condition = m["condition"].get<std::string>();
         metric_rows(t, "mitigation_fixed", condition, m["eval"]["fixed"]);
         char buf[48];
         std::snprintf(buf, sizeof(buf), "%.12g",
                       m["report"]["mitigation_recall"].get<double>());
         t.rows.push_back({"mitigation", condition, "mitigation_recall", buf});
      }
   csv::write_file(csv_path, t);
}

} // namespace flowbench
