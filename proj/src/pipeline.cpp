#include "entangled/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "entangled/centrality.hpp"
#include "entangled/entanglement.hpp"
#include "entangled/error.hpp"
#include "entangled/io.hpp"
#include "entangled/log.hpp"
#include "entangled/parallel.hpp"
#include "entangled/rng.hpp"
#include "entangled/synthetic.hpp"

namespace entangled {
namespace {

// Child streams of the run seed.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kLouvainStream = 1;
constexpr std::uint64_t kSplitStream = 5;

std::string graph_file(std::size_t gi, const char* suffix) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "graph_%04zu%s", gi, suffix);
  return buf;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::vector<std::size_t> gather(std::span<const std::size_t> values, std::span<const std::size_t> idx) {
  std::vector<std::size_t> out;
  out.reserve(idx.size());
  for (auto i : idx) {
    out.push_back(values[i]);
  }
  return out;
}

}  // namespace

LabeledDataset read_manifest(const std::filesystem::path& manifest, double threshold, std::uint64_t seed,
                             double train_ratio, double val_ratio) {
  std::ifstream in(manifest);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open manifest " + manifest.string());
  }
  LabeledDataset ds;
  std::size_t max_label = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || (line_no == 1 && line.rfind("path", 0) == 0)) {
      continue;
    }
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw Error(ErrorKind::InvalidInput, "manifest line " + std::to_string(line_no) + ": expected path,label");
    }
    std::size_t label = 0;
    try {
      label = std::stoul(line.substr(comma + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, "manifest line " + std::to_string(line_no) + ": bad label");
    }
    std::filesystem::path csv = line.substr(0, comma);
    if (csv.is_relative()) {
      csv = manifest.parent_path() / csv;
    }
    ds.graphs.push_back(pearson_graph(read_time_series_csv(csv), threshold));
    ds.labels.push_back(label);
    ds.metadata.emplace_back();
    max_label = std::max(max_label, label);
  }
  if (ds.graphs.empty()) {
    throw Error(ErrorKind::InvalidInput, "manifest lists no time series");
  }
  ds.num_classes = std::max<std::size_t>(2, max_label + 1);
  ds.splits = random_splits(ds.size(), seed, train_ratio, val_ratio);
  ds.validate();
  return ds;
}

LabeledDataset load_dataset(const ExperimentConfig& cfg) {
  if (cfg.data == "dataset") {
    return dataset_from_json(read_json(cfg.data_path));
  }
  if (cfg.data == "manifest") {
    return read_manifest(cfg.data_path, cfg.threshold, derive_seed(cfg.seed, kSplitStream), cfg.train_ratio,
                         cfg.val_ratio);
  }
  SyntheticConfig sc = SyntheticConfig::hub_contrast(cfg.synth_nodes, cfg.synth_graphs_per_class);
  sc.classes[1].hub_boost = cfg.synth_hub_boost;
  sc.train_ratio = cfg.train_ratio;
  sc.val_ratio = cfg.val_ratio;
  return generate_synthetic(sc, derive_seed(cfg.seed, kDataStream));
}

std::vector<ModulePartition> detect_modules(const std::vector<BrainGraph>& graphs, std::uint64_t seed,
                                            double resolution, std::size_t workers) {
  std::vector<ModulePartition> out(graphs.size());
  parallel_for(graphs.size(), workers, [&](std::size_t gi) {
    const BrainGraph& g = graphs[gi];
    if (g.edge_count() == 0) {
      ModulePartition p;
      p.assignment.resize(g.node_count());
      for (std::size_t i = 0; i < g.node_count(); ++i) {
        p.assignment[i] = i;
      }
      p.module_count = g.node_count();
      out[gi] = std::move(p);
      return;
    }
    out[gi] = louvain(g, derive_seed(seed, gi), resolution);
  });
  return out;
}

std::vector<ModulePartition> shared_modules(const std::vector<BrainGraph>& graphs,
                                            std::span<const std::size_t> reference, std::uint64_t seed,
                                            double resolution) {
  if (graphs.empty() || reference.empty()) {
    throw Error(ErrorKind::InvalidInput, "a shared partition needs at least one reference graph");
  }
  const auto n = graphs.front().node_count();
  for (const auto& g : graphs) {
    if (g.node_count() != n) {
      throw Error(ErrorKind::ShapeMismatch, "a shared partition needs graphs of equal size");
    }
  }
  Matrix mean = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (auto gi : reference) {
    mean += graphs.at(gi).adjacency();
  }
  mean /= static_cast<double>(reference.size());
  const BrainGraph avg(mean, Matrix::Identity(mean.rows(), mean.rows()));
  return std::vector<ModulePartition>(graphs.size(), detect_modules({avg}, seed, resolution, 1).front());
}

std::vector<std::vector<double>> dataset_entanglement(const std::vector<BrainGraph>& graphs,
                                                      const ExperimentConfig& cfg) {
  const PerturbationMode mode = cfg.perturbation();
  std::vector<std::vector<double>> out(graphs.size());
  parallel_for(graphs.size(), cfg.workers,
               [&](std::size_t gi) { out[gi] = node_entanglement_exact(graphs[gi], cfg.gamma, mode, 1); });
  return out;
}

std::vector<GraphInput> build_inputs(const LabeledDataset& ds, const std::vector<std::vector<double>>& ne,
                                     std::size_t buckets, const EncoderParams* encoder) {
  std::vector<GraphInput> inputs(ds.size());
  for (std::size_t gi = 0; gi < ds.size(); ++gi) {
    inputs[gi].features = ds.graphs[gi].features();
    inputs[gi].buckets = importance_buckets(ne[gi], buckets);
    if (encoder != nullptr) {
      inputs[gi].module_repr = encode(ds.graphs[gi], *encoder);
    }
  }
  return inputs;
}

EvalReport evaluate_split(const std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                          std::span<const std::size_t> split, std::size_t num_classes,
                          const ModelParams& params, const ModelConfig& model_cfg,
                          std::vector<std::vector<double>>* probabilities) {
  if (split.empty()) {
    throw Error(ErrorKind::InvalidInput, "evaluation split is empty");
  }
  std::vector<std::vector<double>> probs;
  probs.reserve(split.size());
  for (auto gi : split) {
    probs.push_back(classify(inputs[gi], params, model_cfg));
  }
  const auto split_labels = gather(labels, split);
  EvalReport report = evaluate(probs, split_labels, num_classes);
  if (probabilities != nullptr) {
    *probabilities = std::move(probs);
  }
  return report;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  log::info("loading data (" + cfg.data + ")");
  return run_experiment(cfg, load_dataset(cfg));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, LabeledDataset ds) {
  cfg.validate();
  ds.validate();
  if (ds.size() == 0) {
    throw Error(ErrorKind::InvalidInput, "dataset is empty");
  }
  for (const auto& g : ds.graphs) {
    if (g.feature_dim() != ds.graphs.front().feature_dim()) {
      throw Error(ErrorKind::ShapeMismatch, "graphs disagree on the feature dimension");
    }
  }
  ExperimentResult r;
  r.dataset = std::move(ds);
  const LabeledDataset& data = r.dataset;

  if (cfg.partition == "shared") {
    log::info("louvain on the mean of " + std::to_string(data.splits.train.size()) + " training graphs");
    r.partitions = shared_modules(data.graphs, data.splits.train, derive_seed(cfg.seed, kLouvainStream),
                                  cfg.resolution);
  } else {
    log::info("louvain on " + std::to_string(data.size()) + " graphs");
    r.partitions = detect_modules(data.graphs, derive_seed(cfg.seed, kLouvainStream), cfg.resolution, cfg.workers);
  }

  if (cfg.ablate != Ablation::FMAttn) {
    std::vector<BrainGraph> graphs;
    std::vector<ModulePartition> parts;
    for (auto gi : data.splits.train) {
      if (r.partitions[gi].module_count >= 2) {
        graphs.push_back(data.graphs[gi]);
        parts.push_back(r.partitions[gi]);
      }
    }
    if (graphs.empty()) {
      throw Error(ErrorKind::NoNegatives, "no training graph has two or more modules for the extractor");
    }
    log::info("training the module extractor on " + std::to_string(graphs.size()) + " graphs");
    r.extractor = train_extractor(graphs, parts, cfg.contrastive());
  }

  log::info("node entanglement (" + cfg.mode + ", gamma " + std::to_string(cfg.gamma) + ")");
  r.ne = dataset_entanglement(data.graphs, cfg);
  r.inputs = build_inputs(data, r.ne, cfg.buckets, r.extractor ? &r.extractor->params : nullptr);

  r.model_config = cfg.model(data.graphs.front().feature_dim(), data.num_classes);
  log::info("training the classifier");
  if (cfg.extractor_tuning == "joint" && r.extractor) {
    log::info("training the classifier and tuning the extractor jointly");
    auto joint = train_joint(data.graphs, std::move(r.inputs), data.labels, data.splits.train, data.splits.val,
                             r.model_config, cfg.training(), init_model(r.model_config), r.extractor->params);
    r.model = std::move(joint.classifier);
    r.extractor->params = std::move(joint.extractor);
    r.inputs = std::move(joint.inputs);
  } else {
    r.model = train_classifier(r.inputs, data.labels, data.splits.train, data.splits.val, r.model_config,
                               cfg.training());
  }
  r.report = evaluate_split(r.inputs, data.labels, data.splits.test, data.num_classes, r.model.params,
                            r.model_config, &r.test_probabilities);
  return r;
}

Json seed_manifest(const ExperimentConfig& cfg) {
  return Json{{"seed", cfg.seed},
              {"data", derive_seed(cfg.seed, kDataStream)},
              {"louvain", derive_seed(cfg.seed, kLouvainStream)},
              {"extractor", derive_seed(cfg.seed, 2)},
              {"model_init", derive_seed(cfg.seed, 3)},
              {"training", derive_seed(cfg.seed, 4)},
              {"manifest_splits", derive_seed(cfg.seed, kSplitStream)}};
}

Json metrics_to_json(const ExperimentResult& r, const ExperimentConfig& cfg) {
  Json history = Json::array();
  for (const auto& e : r.model.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train_loss", e.train_loss},
                       {"train_accuracy", e.train_accuracy},
                       {"val_accuracy", e.val_accuracy},
                       {"val_loss", e.val_loss}});
  }
  Json probs = Json::array();
  for (std::size_t k = 0; k < r.test_probabilities.size(); ++k) {
    probs.push_back({{"graph", r.dataset.splits.test[k]},
                     {"label", r.dataset.labels[r.dataset.splits.test[k]]},
                     {"probabilities", r.test_probabilities[k]}});
  }
  Json j{{"ablate", ablation_name(cfg.ablate)},
         {"seed", cfg.seed},
         {"test", report_to_json(r.report)},
         {"test_size", r.dataset.splits.test.size()},
         {"best_epoch", r.model.best_epoch},
         {"history", history},
         {"test_predictions", probs}};
  if (r.extractor) {
    j["extractor_loss"] = r.extractor->epoch_loss;
  }
  return j;
}

std::string matrix_csv(const Matrix& m) {
  std::ostringstream out;
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) {
        out << ',';
      }
      out << m(i, j);
    }
    out << '\n';
  }
  return out.str();
}

CentralityTable graph_centrality(const BrainGraph& g, const ExperimentConfig& cfg, bool correlation_features) {
  CentralityTable t = centrality_table(g);
  if (correlation_features) {
    t.fc_strength = fc_strength(g.features()).values;
  }
  const NodeEntanglementReport ne = entanglement_report(g, cfg.gamma, cfg.perturbation(), 1);
  t.ne_exact = ne.exact;
  if (ne.approximation_defined || !ne.approximate.empty()) {
    t.ne_approx = ne.approximate;
  }
  return t;
}

void write_artifacts(const ExperimentResult& r, const ExperimentConfig& cfg, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  write_text(out / "config.txt", config_to_text(cfg));
  write_json(out / "seeds.json", seed_manifest(cfg));
  write_json(out / "dataset.json", dataset_to_json(r.dataset));
  write_json(out / "splits.json", Json{{"train", r.dataset.splits.train},
                                       {"val", r.dataset.splits.val},
                                       {"test", r.dataset.splits.test}});
  Json parts = Json::array();
  const bool shared = cfg.partition == "shared";
  for (std::size_t gi = 0; gi < r.partitions.size(); ++gi) {
    // a shared partition is a single run, seeded as index 0
    parts.push_back(partition_to_json(r.partitions[gi], derive_seed(derive_seed(cfg.seed, kLouvainStream), shared ? 0 : gi)));
  }
  write_json(out / "partitions.json", parts);
  if (r.extractor) {
    write_json(out / "encoder.json", encoder_to_json(r.extractor->params, cfg.contrastive()));
  }
  write_json(out / "model.json", model_to_json(r.model.params, r.model_config));
  write_json(out / "metrics.json", metrics_to_json(r, cfg));

  const bool corr = cfg.data == "manifest";
  std::vector<std::string> tables(r.dataset.size());
  parallel_for(r.dataset.size(), cfg.workers, [&](std::size_t gi) {
    tables[gi] = centrality_csv(graph_centrality(r.dataset.graphs[gi], cfg, corr));
  });
  for (std::size_t gi = 0; gi < tables.size(); ++gi) {
    write_text(out / "centrality" / graph_file(gi, ".csv"), tables[gi]);
  }
  for (auto gi : r.dataset.splits.test) {
    const auto maps = attention_maps(r.inputs[gi], r.model.params, r.model_config);
    for (std::size_t l = 0; l < maps.size(); ++l) {
      write_text(out / "heatmaps" / graph_file(gi, ("_layer" + std::to_string(l) + ".csv").c_str()),
                 matrix_csv(maps[l]));
    }
  }
}

ExperimentResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  ExperimentResult r = run_experiment(cfg);
  write_artifacts(r, cfg, out);
  return r;
}

Json run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out) {
  const Ablation variants[] = {Ablation::None, Ablation::NE, Ablation::FMAttn};
  Json rows = Json::array();
  std::string csv = "variant,seed,ACC,AUC,F1\n";
  for (const Ablation a : variants) {
    std::vector<double> acc;
    std::vector<double> auc;
    Json per_seed = Json::array();
    for (std::size_t k = 0; k < cfg.repeats; ++k) {
      ExperimentConfig run = cfg;
      run.ablate = a;
      run.seed = cfg.seed + k;
      log::info("ablation " + ablation_name(a) + " seed " + std::to_string(run.seed));
      const ExperimentResult r = run_experiment(run);
      acc.push_back(r.report.accuracy);
      if (r.report.auc) {
        auc.push_back(*r.report.auc);
      }
      per_seed.push_back({{"seed", run.seed},
                          {"ACC", r.report.accuracy},
                          {"AUC", optional_json(r.report.auc)},
                          {"F1", optional_json(r.report.f1)}});
      std::ostringstream line;
      line.precision(17);
      line << ablation_name(a) << ',' << run.seed << ',' << r.report.accuracy << ','
           << (r.report.auc ? std::to_string(*r.report.auc) : "") << ','
           << (r.report.f1 ? std::to_string(*r.report.f1) : "") << '\n';
      csv += line.str();
    }
    auto summary = [](const std::vector<double>& v) -> Json {
      if (v.empty()) {
        return Json{{"mean", nullptr}, {"std", nullptr}};
      }
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      return Json{{"mean", mean}, {"std", sd}};
    };
    rows.push_back({{"variant", ablation_name(a)},
                    {"ACC", summary(acc)},
                    {"AUC", summary(auc)},
                    {"runs", per_seed}});
  }
  Json j{{"spread", "sample standard deviation over seeds"}, {"repeats", cfg.repeats}, {"variants", rows}};
  if (!out.empty()) {
    write_json(out / "ablation.json", j);
    write_text(out / "ablation.csv", csv);
    write_text(out / "config.txt", config_to_text(cfg));
  }
  return j;
}

}  // namespace entangled
