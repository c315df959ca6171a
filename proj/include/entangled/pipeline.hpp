#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "entangled/centrality.hpp"
#include "entangled/community.hpp"
#include "entangled/config.hpp"
#include "entangled/encoder.hpp"
#include "entangled/graph.hpp"
#include "entangled/metrics.hpp"
#include "entangled/transformer.hpp"

namespace entangled {

/// Rows of `path,label`; paths are relative to the manifest. Each CSV becomes
/// a thresholded PCC graph with correlation-profile features.
LabeledDataset read_manifest(const std::filesystem::path& manifest, double threshold, std::uint64_t seed,
                             double train_ratio = 0.8, double val_ratio = 0.1);

/// Synthetic hub-contrast family, a dataset JSON, or a manifest, per `cfg.data`.
LabeledDataset load_dataset(const ExperimentConfig& cfg);

/// One Louvain run per graph, seeded per index. Edgeless graphs get singletons.
std::vector<ModulePartition> detect_modules(const std::vector<BrainGraph>& graphs, std::uint64_t seed,
                                            double resolution, std::size_t workers);

/// One Louvain run on the mean adjacency of the `reference` graphs, reused for
/// every graph. All graphs must have the same node count.
std::vector<ModulePartition> shared_modules(const std::vector<BrainGraph>& graphs,
                                            std::span<const std::size_t> reference, std::uint64_t seed,
                                            double resolution);

/// Exact NE of every graph under the configured perturbation.
std::vector<std::vector<double>> dataset_entanglement(const std::vector<BrainGraph>& graphs,
                                                      const ExperimentConfig& cfg);

/// Features, importance buckets and (unless `encoder` is null) module-aware representations.
std::vector<GraphInput> build_inputs(const LabeledDataset& ds, const std::vector<std::vector<double>>& ne,
                                     std::size_t buckets, const EncoderParams* encoder);

struct ExperimentResult {
  LabeledDataset dataset;
  std::vector<ModulePartition> partitions;
  std::optional<ExtractorTraining> extractor;
  std::vector<std::vector<double>> ne;
  std::vector<GraphInput> inputs;
  ModelConfig model_config;
  TrainedModel model;
  std::vector<std::vector<double>> test_probabilities;
  EvalReport report;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, LabeledDataset ds);

/// Predicts every graph of `split` and scores it.
EvalReport evaluate_split(const std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                          std::span<const std::size_t> split, std::size_t num_classes,
                          const ModelParams& params, const ModelConfig& model_cfg,
                          std::vector<std::vector<double>>* probabilities = nullptr);

/// Contains no timings, so identical inputs give identical bytes.
Json metrics_to_json(const ExperimentResult& r, const ExperimentConfig& cfg);
Json seed_manifest(const ExperimentConfig& cfg);

/// Writes config.txt, seeds.json, dataset.json, splits.json, partitions.json,
/// encoder.json, model.json, metrics.json, centrality/*.csv and heatmaps/*.csv.
void write_artifacts(const ExperimentResult& r, const ExperimentConfig& cfg, const std::filesystem::path& out);

ExperimentResult run_pipeline(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Node table of one graph with NE columns filled from the configured perturbation.
CentralityTable graph_centrality(const BrainGraph& g, const ExperimentConfig& cfg, bool correlation_features);

std::string matrix_csv(const Matrix& m);

/// Full model against the -NE and -FM-Attn ablations over cfg.repeats
/// consecutive seeds; writes ablation.json and ablation.csv.
Json run_ablation(const ExperimentConfig& cfg, const std::filesystem::path& out);

}  // namespace entangled
