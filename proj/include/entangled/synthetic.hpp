#pragma once

#include <cstdint>
#include <vector>

#include "entangled/graph.hpp"
#include "entangled/rng.hpp"

namespace entangled {

struct WeightRange {
  double lo = 0.5;
  double hi = 1.0;
};

/// Generation parameters for one class of graphs.
struct ClassConfig {
  double p_intra = 0.9;
  double p_inter = 0.05;
  WeightRange intra_weight{0.5, 1.0};
  WeightRange inter_weight{0.1, 0.4};
  std::size_t hub_count = 0;
  /// Hub degree as a multiple of the mean degree (values <= 1 add nothing).
  double hub_boost = 1.0;
  WeightRange hub_weight{0.5, 1.0};
  std::size_t graphs = 100;
};

/// Planted-partition generator with optional hubs. Node i belongs to
/// module floor(i * modules / n).
struct SyntheticConfig {
  std::size_t n = 30;
  std::size_t modules = 3;
  std::vector<ClassConfig> classes;
  FeatureKind features = FeatureKind::CorrelationProfile;
  double train_ratio = 0.8;
  double val_ratio = 0.1;

  /// Throws Error{InvalidConfig}.
  void validate() const;

  /// Two classes separated by hub strength (class 1 carries boosted hubs).
  static SyntheticConfig hub_contrast(std::size_t n = 30, std::size_t graphs_per_class = 100);
  /// Single class, no hubs.
  static SyntheticConfig planted(std::size_t n, std::size_t modules, double p_intra, double p_inter,
                                 std::size_t graphs = 1);
  /// Single class with one hub of the given boost.
  static SyntheticConfig planted_hub(std::size_t n = 30, double hub_boost = 3.0);
};

struct GeneratedGraph {
  BrainGraph graph;
  GraphMetadata metadata;
};

std::size_t planted_module(std::size_t node, std::size_t n, std::size_t modules);

GeneratedGraph generate_graph(const SyntheticConfig& config, const ClassConfig& cls, Rng& rng);

/// Deterministic in (config, seed). Graphs of class c are generated from
/// child streams derive_seed(seed, c), interleaved by class in the output.
LabeledDataset generate_synthetic(const SyntheticConfig& config, std::uint64_t seed);

}  // namespace entangled
