#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "entangled/encoder.hpp"
#include "entangled/entanglement.hpp"
#include "entangled/transformer.hpp"

namespace entangled {

enum class Ablation { None, NE, FMAttn };

std::string ablation_name(Ablation a);
Ablation parse_ablation(const std::string& name);

/// Every knob of one experiment. Stored as a flat `key = value` text file;
/// `#` starts a comment. Unknown keys and malformed values are errors.
struct ExperimentConfig {
  std::string preset = "desk";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // data
  std::string data = "synthetic";  // synthetic | dataset | manifest
  std::string data_path;           // dataset JSON, or a manifest CSV of path,label rows
  std::size_t synth_nodes = 30;
  std::size_t synth_graphs_per_class = 100;
  double synth_hub_boost = 3.0;
  double threshold = 0.3;
  double train_ratio = 0.8;
  double val_ratio = 0.1;

  // classifier
  std::size_t layers = 2;
  std::size_t heads = 4;
  std::size_t hidden_dim = 32;
  std::size_t ffn_dim = 64;
  double dropout = 0.1;
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 50;
  double weight_decay = 1e-4;
  std::size_t warmup_steps = 10;
  std::string readout = "mean";
  std::size_t buckets = 8;

  // node entanglement
  double gamma = 1.0;
  std::string mode = "ground";
  double mode_parameter = 1.0;

  // functional-module extractor
  std::string partition = "per-graph";  // per-graph | shared (one Louvain run on the mean training graph)
  std::string extractor_tuning = "frozen";  // frozen | joint (tuned through the classifier loss)
  double resolution = 1.0;
  double drop_fraction = 0.2;
  double temperature = 0.5;
  std::size_t negatives = 16;
  std::size_t extractor_dim = 32;
  std::size_t extractor_depth = 2;
  std::size_t extractor_epochs = 10;
  std::size_t extractor_batch_size = 16;
  double extractor_learning_rate = 1e-2;

  Ablation ablate = Ablation::None;
  std::size_t repeats = 5;  // seeds averaged by the ablation study

  /// Throws InvalidConfig.
  void validate() const;

  static ExperimentConfig paper();
  static ExperimentConfig desk();
  static ExperimentConfig from_preset(const std::string& name);

  PerturbationMode perturbation() const { return PerturbationMode::parse(mode, mode_parameter); }
  ModelConfig model(std::size_t input_dim, std::size_t num_classes) const;
  TrainConfig training() const;
  ContrastiveConfig contrastive() const;
};

/// Applies `key = value` lines on top of `base`; a `preset` line resets to
/// that preset first, so it should come before any other key.
ExperimentConfig parse_config(const std::string& text, ExperimentConfig base = ExperimentConfig::desk());
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const ExperimentConfig& cfg);

}  // namespace entangled
