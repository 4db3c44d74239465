#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "flowbench/harness.hpp"

using namespace flowbench;
namespace fs = std::filesystem;

int main(int argc, char** argv)
{
   CLI::App app{"NetFlow robustness benchmarking toolkit"};
   app.require_subcommand(1);

   // standardize: raw CSV + mapping -> unified CSV
   auto* cmd_std = app.add_subcommand("standardize", "Map a raw dataset to the unified schema");
   std::string std_in, std_mapping, std_out, std_source = "dataset";
   cmd_std->add_option("--in", std_in, "raw CSV input")->required();
   cmd_std->add_option("--mapping", std_mapping, "mapping config JSON (default: identity)");
   cmd_std->add_option("--out", std_out, "unified CSV output")->required();
   cmd_std->add_option("--source", std_source, "dataset_source tag");

   // sample: unified CSV -> reduced CSV + plan
   auto* cmd_sample = app.add_subcommand("sample", "Adaptive stratified down-sampling");
   std::string smp_config, smp_in, smp_out, smp_plan;
   uint64_t smp_seed = 0;
   size_t smp_chunk = 0;
   cmd_sample->add_option("--config", smp_config, "sampling config JSON");
   cmd_sample->add_option("--seed", smp_seed, "selection seed")->required();
   cmd_sample->add_option("--in", smp_in, "unified CSV input")->required();
   cmd_sample->add_option("--out", smp_out, "reduced CSV output")->required();
   cmd_sample->add_option("--emit-plan", smp_plan, "write the sampling plan JSON here");
   cmd_sample->add_option("--chunk-rows", smp_chunk, "stream the input in chunks of this size");

   // graph: unified CSV -> nodes/edges CSV
   auto* cmd_graph = app.add_subcommand("graph", "Build the communication graph");
   std::string gr_in, gr_stats, gr_fit_out, gr_nodes, gr_edges;
   cmd_graph->add_option("--in", gr_in, "unified CSV input")->required();
   cmd_graph->add_option("--scaler", gr_stats, "scaler stats JSON (fit on input if absent)");
   cmd_graph->add_option("--emit-scaler", gr_fit_out, "write fitted scaler stats here");
   cmd_graph->add_option("--nodes-out", gr_nodes, "nodes CSV output")->required();
   cmd_graph->add_option("--edges-out", gr_edges, "edges CSV output")->required();

   // train: unified CSV -> model + metrics
   auto* cmd_train = app.add_subcommand("train", "Train the reference detector");
   std::string tr_in, tr_model;
   uint64_t tr_seed = 0;
   int tr_hidden = 16, tr_epochs = 150;
   double tr_lr = 0.05, tr_frac = 0.70;
   cmd_train->add_option("--in", tr_in, "unified CSV input")->required();
   cmd_train->add_option("--out", tr_model, "model JSON output")->required();
   cmd_train->add_option("--seed", tr_seed, "training seed");
   cmd_train->add_option("--hidden", tr_hidden, "hidden width");
   cmd_train->add_option("--epochs", tr_epochs, "training epochs");
   cmd_train->add_option("--learning-rate", tr_lr, "Adam learning rate");
   cmd_train->add_option("--train-fraction", tr_frac, "stratified train fraction");

   // attack: unified CSV + model -> attacked graph + manifest
   auto* cmd_attack = app.add_subcommand("attack", "Run one attack condition");
   std::string at_in, at_model, at_kind = "pgd", at_outdir = ".";
   double at_eps = 0.1, at_frac = 0.1;
   int at_steps = 10, at_edges_per_node = 5;
   uint64_t at_seed = 0;
   cmd_attack->add_option("--in", at_in, "unified CSV input (evaluation set)")->required();
   cmd_attack->add_option("--model", at_model, "detector model JSON")->required();
   cmd_attack->add_option("--kind", at_kind, "pgd | edge_remove | node_inject");
   cmd_attack->add_option("--epsilon", at_eps, "PGD L-inf budget");
   cmd_attack->add_option("--steps", at_steps, "PGD iterations");
   cmd_attack->add_option("--fraction", at_frac, "removal/injection fraction");
   cmd_attack->add_option("--edges-per-node", at_edges_per_node, "synthetic edges per injected node");
   cmd_attack->add_option("--seed", at_seed, "attack seed");
   cmd_attack->add_option("--out-dir", at_outdir, "output directory");

   // mitigate: attacked graph + manifest -> fixed graph + report
   auto* cmd_mit = app.add_subcommand("mitigate", "Analyst mitigation over an attacked graph");
   std::string mi_nodes, mi_edges, mi_manifest, mi_model, mi_outdir = ".", mi_endpoint,
               mi_model_name;
   double mi_threshold = 0.6;
   int mi_parallel = 4;
   cmd_mit->add_option("--nodes", mi_nodes, "attacked nodes CSV")->required();
   cmd_mit->add_option("--edges", mi_edges, "attacked edges CSV")->required();
   cmd_mit->add_option("--manifest", mi_manifest, "attack manifest JSON")->required();
   cmd_mit->add_option("--model", mi_model, "detector model JSON")->required();
   cmd_mit->add_option("--threshold", mi_threshold, "flagging threshold");
   cmd_mit->add_option("--endpoint", mi_endpoint, "remote analyst endpoint (default: offline heuristic)");
   cmd_mit->add_option("--analyst-model", mi_model_name, "remote analyst model name");
   cmd_mit->add_option("--parallelism", mi_parallel, "concurrent analyst queries");
   cmd_mit->add_option("--out-dir", mi_outdir, "output directory");

   // synth: generate testbed sessions
   auto* cmd_synth = app.add_subcommand("synth", "Generate the synthetic testbed sessions");
   std::string sy_outdir = ".", sy_target = "192.168.2.8";
   double sy_scale = 1.0;
   uint64_t sy_seed = 0;
   cmd_synth->add_option("--out-dir", sy_outdir, "output directory");
   cmd_synth->add_option("--seed", sy_seed, "generation seed");
   cmd_synth->add_option("--rate-scale", sy_scale, "uniform rate multiplier");
   cmd_synth->add_option("--flood-target", sy_target, "UDP/ICMP flood target address");

   // run: full protocol
   auto* cmd_run = app.add_subcommand("run", "Run the full four-step protocol");
   std::string rn_config, rn_outdir;
   uint64_t rn_seed = 0;
   bool rn_seed_set = false, rn_out_set = false;
   cmd_run->add_option("--config", rn_config, "run config JSON (default config if absent)");
   cmd_run->add_option("--out-dir", rn_outdir, "output directory override")
       ->each([&](const std::string&) { rn_out_set = true; });
   cmd_run->add_option("--seed", rn_seed, "master seed override")
       ->each([&](const std::string&) { rn_seed_set = true; });

   CLI11_PARSE(app, argc, argv);

   try {
      if (*cmd_std) {
         MappingConfig mapping = std_mapping.empty()
                                     ? MappingConfig{}
                                     : MappingConfig::from_json_file(std_mapping);
         if (mapping.dataset_source.empty())
            mapping.dataset_source = std_source;
         StandardizeResult res = standardize_dataset(csv::read_file(std_in), mapping);
         write_flows_csv(std_out, res.records);
         std::cerr << "standardized " << res.records.size() << " rows, skipped "
                   << res.skipped << "\n";
      } else if (*cmd_sample) {
         SamplingConfig cfg = smp_config.empty()
                                  ? SamplingConfig{}
                                  : SamplingConfig::from_json_file(smp_config);
         cfg.validate();
         std::vector<FlowRecord> sampled;
         SamplingPlan plan;
         if (smp_chunk > 0) {
            ClassHistogram hist;
            {
               csv::ChunkReader reader(smp_in);
               csv::Table chunk_table;
               chunk_table.header = reader.header();
               while (!reader.done()) {
                  chunk_table.rows = reader.next_chunk(smp_chunk);
                  hist.add(flows_from_table(chunk_table));
               }
            }
            plan = compute_rates(hist, cfg);
            ChunkedSampler sampler(plan, smp_seed);
            csv::ChunkReader reader(smp_in);
            csv::Table chunk_table;
            chunk_table.header = reader.header();
            while (!reader.done()) {
               chunk_table.rows = reader.next_chunk(smp_chunk);
               sampler.add_chunk(flows_from_table(chunk_table));
            }
            sampled = sampler.finish();
         } else {
            std::vector<FlowRecord> rows = read_flows_csv(smp_in);
            plan = compute_rates(class_histogram(rows), cfg);
            sampled = stratified_sample(rows, plan, smp_seed);
         }
         write_flows_csv(smp_out, sampled);
         if (!smp_plan.empty())
            plan.save(smp_plan);
         std::cerr << "kept " << sampled.size() << " of " << plan.total << " rows\n";
      } else if (*cmd_graph) {
         std::vector<FlowRecord> rows = read_flows_csv(gr_in);
         ScalerStats stats = gr_stats.empty()
                                 ? fit_scaler(rows, default_feature_names())
                                 : ScalerStats::load(gr_stats);
         if (!gr_fit_out.empty())
            stats.save(gr_fit_out);
         CommGraph g = build_graph(rows, stats);
         write_graph_csv(g, gr_nodes, gr_edges);
         std::cerr << "graph: " << g.node_count() << " nodes, " << g.edge_count()
                   << " edges\n";
      } else if (*cmd_train) {
         std::vector<FlowRecord> rows = read_flows_csv(tr_in);
         SplitSpec split;
         split.train_fraction = tr_frac;
         split.seed = derive_seed(tr_seed, "split");
         auto [train, test] = split_stratified(rows, split);
         ScalerStats stats = fit_scaler(train, default_feature_names());
         DetectorConfig dc;
         dc.hidden = tr_hidden;
         dc.epochs = tr_epochs;
         dc.learning_rate = tr_lr;
         dc.seed = tr_seed;
         DetectorModel model = train_detector(build_graph(train, stats), dc);
         model.save(tr_model);
         Metrics m = evaluate_graph(model, build_graph(test, stats));
         std::cout << metrics_json(m).dump(2) << "\n";
      } else if (*cmd_attack) {
         DetectorModel model = DetectorModel::load(at_model);
         std::vector<FlowRecord> rows = read_flows_csv(at_in);
         CommGraph clean = build_graph(rows, model.stats);
         AttackConfig a;
         a.kind = attack_kind_from_name(at_kind);
         a.epsilon = at_eps;
         a.steps = at_steps;
         a.fraction = at_frac;
         a.edges_per_node = at_edges_per_node;
         a.seed = at_seed;
         AttackedGraph attacked = apply_attack(clean, &model, a);
         fs::create_directories(at_outdir);
         std::string stem = a.condition_name();
         write_graph_csv(attacked.graph, (fs::path(at_outdir) / (stem + "_nodes.csv")).string(),
                         (fs::path(at_outdir) / (stem + "_edges.csv")).string());
         attacked.manifest.save((fs::path(at_outdir) / (stem + "_manifest.json")).string());
         Metrics clean_m = evaluate_graph(model, clean);
         Metrics att_m = evaluate_graph(model, attacked.graph);
         nlohmann::json out = {{"condition", stem},
                               {"clean", metrics_json(clean_m)},
                               {"attacked", metrics_json(att_m)}};
         std::cout << out.dump(2) << "\n";
      } else if (*cmd_mit) {
         DetectorModel model = DetectorModel::load(mi_model);
         AttackManifest manifest = AttackManifest::load(mi_manifest);
         AttackedGraph attacked;
         attacked.graph = read_graph_csv(mi_nodes, mi_edges, model.stats);
         attacked.manifest = manifest;
         MitigationConfig cfg;
         cfg.threshold = mi_threshold;
         cfg.parallelism = mi_parallel;
         cfg.endpoint = mi_endpoint;
         cfg.model_name = mi_model_name;
         std::unique_ptr<AnalystClient> client;
         if (mi_endpoint.empty())
            client = std::make_unique<HeuristicAnalyst>();
         else
            client = std::make_unique<HttpAnalyst>(cfg);
         MitigationResult mit = run_mitigation(attacked, *client, cfg);
         fs::create_directories(mi_outdir);
         write_graph_csv(mit.fixed, (fs::path(mi_outdir) / "fixed_nodes.csv").string(),
                         (fs::path(mi_outdir) / "fixed_edges.csv").string());
         std::ofstream rep((fs::path(mi_outdir) / "mitigation_report.json").string());
         rep << mit.report.to_json() << "\n";
         std::cout << mit.report.to_json() << "\n";
      } else if (*cmd_synth) {
         fs::create_directories(sy_outdir);
         for (const auto& session : default_sessions(sy_target, sy_scale)) {
            std::vector<FlowRecord> records =
                synthesize_session(session, derive_seed(sy_seed, "synth"));
            write_flows_csv((fs::path(sy_outdir) / (session.name + ".csv")).string(),
                            records);
            std::cerr << session.name << ": " << records.size() << " flows\n";
         }
      } else if (*cmd_run) {
         RunConfig cfg = rn_config.empty() ? RunConfig{} : RunConfig::from_json_file(rn_config);
         if (rn_seed_set)
            cfg.master_seed = rn_seed;
         if (rn_out_set)
            cfg.out_dir = rn_outdir;
         RunResult res = run_protocol(cfg);
         std::cout << "report: " << (fs::path(cfg.out_dir) / "report.json").string()
                   << "\n";
         if (!res.ok) {
            std::cerr << "stage failures:\n" << res.report["errors"].dump(2) << "\n";
            return 1;
         }
      }
   } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
   }
   return 0;
}
