#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "entangled/augmentation.hpp"
#include "entangled/centrality.hpp"
#include "entangled/community.hpp"
#include "entangled/config.hpp"
#include "entangled/entanglement.hpp"
#include "entangled/error.hpp"
#include "entangled/io.hpp"
#include "entangled/log.hpp"
#include "entangled/pipeline.hpp"

namespace fs = std::filesystem;
using namespace entangled;

namespace {

/// Experiment flags shared by train/synth/ablate; unset flags leave the config alone.
struct ExperimentFlags {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<double> threshold;
  std::optional<double> gamma;
  std::optional<std::string> mode;
  std::optional<double> drop_fraction;
  std::optional<std::string> ablate;
  std::optional<std::size_t> workers;
  bool shared_partition = false;
  bool joint = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key = value experiment file")->check(CLI::ExistingFile);
    app->add_option("--preset", preset, "paper | desk")->check(CLI::IsMember({"paper", "desk"}));
    app->add_option("--seed", seed, "run seed");
    app->add_option("--threshold", threshold, "PCC edge threshold");
    app->add_option("--gamma", gamma, "diffusion time of the density matrix");
    app->add_option("--mode", mode, "ground | isolate | attach")
        ->check(CLI::IsMember({"ground", "isolate", "attach"}));
    app->add_option("--drop-fraction", drop_fraction, "edge fraction dropped per augmented view");
    app->add_option("--ablate", ablate, "ne | fm-attn | none")->check(CLI::IsMember({"ne", "fm-attn", "none"}));
    app->add_option("--workers", workers, "worker threads for per-graph work");
    app->add_flag("--shared-partition", shared_partition, "one Louvain partition of the mean training graph");
    app->add_flag("--joint", joint, "tune the extractor through the classifier loss");
  }

  ExperimentConfig resolve() const {
    ExperimentConfig base = preset.empty() ? ExperimentConfig::desk() : ExperimentConfig::from_preset(preset);
    ExperimentConfig cfg = config.empty() ? base : parse_config(read_text(config), base);
    if (seed) cfg.seed = *seed;
    if (threshold) cfg.threshold = *threshold;
    if (gamma) cfg.gamma = *gamma;
    if (mode) cfg.mode = *mode;
    if (drop_fraction) cfg.drop_fraction = *drop_fraction;
    if (ablate) cfg.ablate = parse_ablation(*ablate);
    if (workers) cfg.workers = *workers;
    if (shared_partition) cfg.partition = "shared";
    if (joint) cfg.extractor_tuning = "joint";
    cfg.validate();
    return cfg;
  }
};

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    write_text(out, text);
  }
}

void emit_json(const std::string& out, const Json& j) { emit(out, j.dump(2) + "\n"); }

/// Everything eval and heatmap need from a finished `train` run.
struct LoadedRun {
  ExperimentConfig cfg;
  LabeledDataset dataset;
  std::vector<GraphInput> inputs;
  ModelConfig model_config;
  ModelParams params;
};

LoadedRun load_run(const fs::path& dir, std::size_t workers) {
  LoadedRun run;
  run.cfg = load_config(dir / "config.txt");
  run.cfg.workers = workers;
  run.dataset = dataset_from_json(read_json(dir / "dataset.json"));
  run.params = model_from_json(read_json(dir / "model.json"), &run.model_config);
  std::optional<EncoderParams> encoder;
  if (run.model_config.use_module_attention) {
    encoder = encoder_from_json(read_json(dir / "encoder.json"));
  }
  const auto ne = dataset_entanglement(run.dataset.graphs, run.cfg);
  run.inputs = build_inputs(run.dataset, ne, run.model_config.buckets, encoder ? &*encoder : nullptr);
  return run;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Brain-graph analysis: node entanglement, functional modules, module-aware graph transformer"};
  app.require_subcommand(1);

  // ingest
  std::string input;
  std::string out;
  double threshold = 0.3;
  bool identity_features = false;
  auto* ingest = app.add_subcommand("ingest", "ROI time-series CSV -> thresholded PCC graph JSON");
  ingest->add_option("--input", input, "CSV with a header of ROI names")->required()->check(CLI::ExistingFile);
  ingest->add_option("--threshold", threshold, "keep edges with PCC >= threshold");
  ingest->add_flag("--identity-features", identity_features, "one-hot node features instead of PCC rows");
  ingest->add_option("--out", out, "output JSON (stdout if omitted)");

  // synth
  ExperimentFlags synth_flags;
  auto* synth = app.add_subcommand("synth", "generate the synthetic hub-contrast dataset");
  synth_flags.attach(synth);
  synth->add_option("--out", out, "output dataset JSON (stdout if omitted)");

  // entangle / metrics / modules / augment operate on one graph
  std::string graph_path;
  double gamma = 1.0;
  std::string mode = "ground";
  double mode_parameter = 1.0;
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  double drop_fraction = 0.2;
  double resolution = 1.0;
  std::string partition_path;
  std::string timeseries;

  auto* entangle = app.add_subcommand("entangle", "exact and approximate node entanglement of one graph");
  entangle->add_option("--graph", graph_path, "graph JSON")->required()->check(CLI::ExistingFile);
  entangle->add_option("--gamma", gamma, "diffusion time");
  entangle->add_option("--mode", mode, "ground | isolate | attach")
      ->check(CLI::IsMember({"ground", "isolate", "attach"}));
  entangle->add_option("--mode-parameter", mode_parameter, "delta for ground, weight for attach");
  entangle->add_option("--workers", workers, "worker threads");
  entangle->add_option("--out", out, "output JSON (stdout if omitted)");

  auto* metrics = app.add_subcommand("metrics", "node centrality table (CSV) of one graph");
  metrics->add_option("--graph", graph_path, "graph JSON")->required()->check(CLI::ExistingFile);
  metrics->add_option("--timeseries", timeseries, "ROI CSV for the FC strength column")->check(CLI::ExistingFile);
  metrics->add_option("--gamma", gamma, "diffusion time");
  metrics->add_option("--mode", mode, "ground | isolate | attach")
      ->check(CLI::IsMember({"ground", "isolate", "attach"}));
  metrics->add_option("--mode-parameter", mode_parameter, "delta for ground, weight for attach");
  metrics->add_option("--out", out, "output CSV (stdout if omitted)");

  auto* modules = app.add_subcommand("modules", "Louvain functional modules of one graph");
  modules->add_option("--graph", graph_path, "graph JSON")->required()->check(CLI::ExistingFile);
  modules->add_option("--seed", seed, "node-order seed");
  modules->add_option("--resolution", resolution, "modularity resolution");
  modules->add_option("--out", out, "output JSON (stdout if omitted)");

  auto* augment = app.add_subcommand("augment", "two module-aware edge-dropped views of one graph");
  augment->add_option("--graph", graph_path, "graph JSON")->required()->check(CLI::ExistingFile);
  augment->add_option("--partition", partition_path, "partition JSON (Louvain if omitted)")
      ->check(CLI::ExistingFile);
  augment->add_option("--seed", seed, "sampling seed");
  augment->add_option("--drop-fraction", drop_fraction, "edge fraction dropped per view");
  augment->add_option("--out", out, "output directory")->required();

  ExperimentFlags train_flags;
  auto* train = app.add_subcommand("train", "full pipeline: data, modules, extractor, NE, classifier, artifacts");
  train_flags.attach(train);
  train->add_option("--out", out, "run directory")->required();

  std::string run_dir;
  auto* eval = app.add_subcommand("eval", "re-evaluate a finished run on its test split");
  eval->add_option("--run", run_dir, "directory written by train")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--workers", workers, "worker threads");
  eval->add_option("--out", out, "output JSON (stdout if omitted)");

  std::optional<std::size_t> graph_index;
  auto* heatmap = app.add_subcommand("heatmap", "attention-weight CSVs of a finished run");
  heatmap->add_option("--run", run_dir, "directory written by train")->required()->check(CLI::ExistingDirectory);
  heatmap->add_option("--graph-index", graph_index, "dataset index (all test graphs if omitted)");
  heatmap->add_option("--workers", workers, "worker threads");
  heatmap->add_option("--out", out, "output directory")->required();

  ExperimentFlags ablate_flags;
  std::optional<std::size_t> repeats;
  auto* ablate = app.add_subcommand("ablate", "full model vs -NE vs -FM-Attn over several seeds");
  ablate_flags.attach(ablate);
  ablate->add_option("--repeats", repeats, "number of consecutive seeds");
  ablate->add_option("--out", out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) {
      const auto ts = read_time_series_csv(fs::path(input));
      const auto g =
          pearson_graph(ts, threshold, identity_features ? FeatureKind::Identity : FeatureKind::CorrelationProfile);
      emit_json(out, graph_to_json(g));
    } else if (synth->parsed()) {
      ExperimentConfig cfg = synth_flags.resolve();
      cfg.data = "synthetic";
      emit_json(out, dataset_to_json(load_dataset(cfg)));
    } else if (entangle->parsed()) {
      const auto g = graph_from_json(read_json(graph_path));
      const auto report = entanglement_report(g, gamma, PerturbationMode::parse(mode, mode_parameter), workers);
      emit_json(out, report_to_json(report));
    } else if (metrics->parsed()) {
      const auto g = graph_from_json(read_json(graph_path));
      ExperimentConfig cfg;
      cfg.gamma = gamma;
      cfg.mode = mode;
      cfg.mode_parameter = mode_parameter;
      CentralityTable t = graph_centrality(g, cfg, false);
      if (!timeseries.empty()) {
        const auto ts = read_time_series_csv(fs::path(timeseries));
        if (ts.values().cols() != static_cast<Eigen::Index>(g.node_count())) {
          throw Error(ErrorKind::ShapeMismatch, "time series ROI count differs from the graph node count");
        }
        t.fc_strength = fc_strength(ts).values;
      }
      emit(out, centrality_csv(t));
    } else if (modules->parsed()) {
      const auto g = graph_from_json(read_json(graph_path));
      const auto result = louvain_with_trace(g, seed, resolution);
      Json j = partition_to_json(result.partition, seed);
      j["pass_modularity"] = result.pass_modularity;
      emit_json(out, j);
    } else if (augment->parsed()) {
      const auto g = graph_from_json(read_json(graph_path));
      const ModulePartition p =
          partition_path.empty() ? louvain(g, seed) : partition_from_json(read_json(partition_path));
      const auto pair = make_views(g, p, drop_fraction, seed);
      auto dropped = [](const std::vector<Edge>& edges) {
        Json arr = Json::array();
        for (const auto& e : edges) {
          arr.push_back(Json::array({e.i, e.j, e.weight}));
        }
        return arr;
      };
      write_json(fs::path(out) / "view1.json", graph_to_json(pair.view1));
      write_json(fs::path(out) / "view2.json", graph_to_json(pair.view2));
      write_json(fs::path(out) / "dropped.json",
                 Json{{"view1", dropped(pair.dropped1)}, {"view2", dropped(pair.dropped2)}, {"seed", seed}});
    } else if (train->parsed()) {
      const ExperimentConfig cfg = train_flags.resolve();
      const auto r = run_pipeline(cfg, out);
      const Json test = report_to_json(r.report);
      std::cout << "test ACC " << test["ACC"].dump() << "  AUC " << test["AUC"].dump() << "  F1 "
                << test["F1"].dump() << "\n";
    } else if (eval->parsed()) {
      const LoadedRun run = load_run(run_dir, workers);
      const auto report = evaluate_split(run.inputs, run.dataset.labels, run.dataset.splits.test,
                                         run.dataset.num_classes, run.params, run.model_config);
      emit_json(out, report_to_json(report));
    } else if (heatmap->parsed()) {
      const LoadedRun run = load_run(run_dir, workers);
      std::vector<std::size_t> targets = run.dataset.splits.test;
      if (graph_index) {
        if (*graph_index >= run.dataset.size()) {
          throw Error(ErrorKind::InvalidInput, "graph index out of range");
        }
        targets = {*graph_index};
      }
      for (auto gi : targets) {
        const auto maps = attention_maps(run.inputs[gi], run.params, run.model_config);
        for (std::size_t l = 0; l < maps.size(); ++l) {
          char name[64];
          std::snprintf(name, sizeof name, "graph_%04zu_layer%zu.csv", gi, l);
          write_text(fs::path(out) / name, matrix_csv(maps[l]));
        }
      }
    } else if (ablate->parsed()) {
      ExperimentConfig cfg = ablate_flags.resolve();
      if (repeats) {
        cfg.repeats = *repeats;
      }
      const Json j = run_ablation(cfg, out);
      for (const auto& row : j["variants"]) {
        std::cout << row["variant"].get<std::string>() << ": ACC " << row["ACC"]["mean"].dump() << " +- "
                  << row["ACC"]["std"].dump() << "  AUC " << row["AUC"]["mean"].dump() << " +- "
                  << row["AUC"]["std"].dump() << "\n";
      }
    }
  } catch (const Error& e) {
    log::error(e.what());
    return 2;
  } catch (const std::exception& e) {
    log::error(e.what());
    return 1;
  }
  return 0;
}
