#pragma once

#include <cstdint>
#include <vector>

#include "entangled/augmentation.hpp"
#include "entangled/autograd.hpp"
#include "entangled/community.hpp"
#include "entangled/graph.hpp"
#include "entangled/io.hpp"

namespace entangled {

struct EncoderLayer {
  Matrix weight;  // d_in x d_out
  Matrix bias;    // 1 x d_out
};

/// Mean-aggregation message-passing encoder. Hidden layers apply ReLU,
/// the last layer is linear, and output rows are L2-normalised.
struct EncoderParams {
  std::vector<EncoderLayer> layers;

  std::size_t input_dim() const { return static_cast<std::size_t>(layers.front().weight.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(layers.back().weight.cols()); }
  std::size_t depth() const { return layers.size(); }
};

/// Uniform init in +-sqrt(6 / (d_in + d_out)), zero biases.
EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t depth,
                           std::uint64_t seed);

/// Row-stochastic mean operator over {self} and the neighbours of each node.
Matrix mean_aggregation(const BrainGraph& g);

/// Throws ShapeMismatch if the feature dimension does not match.
Matrix encode(const BrainGraph& g, const EncoderParams& params);

/// Autodiff route; `weights`/`biases` are one Var per layer.
ad::Var encode_var(const BrainGraph& g, std::span<const ad::Var> weights, std::span<const ad::Var> biases);

struct ContrastiveConfig {
  double temperature = 1.0;
  std::size_t negatives = 16;
  std::size_t epochs = 20;
  std::size_t batch_size = 16;
  double learning_rate = 1e-2;
  double drop_fraction = 0.2;
  std::size_t hidden_dim = 64;
  std::size_t depth = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

/// Per-anchor negative node indices for each view.
struct NegativeSample {
  std::vector<std::vector<std::size_t>> view1;
  std::vector<std::vector<std::size_t>> view2;
};

/// Uniform without replacement from outside each anchor's module, clamped
/// to the available count. Throws NoNegatives when a module spans the graph.
NegativeSample sample_negatives(const ModulePartition& p, std::size_t count, std::uint64_t seed);

/// Module-contrastive InfoNCE with view-1 anchors. The numerator averages
/// exp(sim / tau) over the anchor's module in both views (minus the anchor
/// itself in view 1); the denominator sums the sampled negatives of both views.
double info_nce_loss(const Matrix& h1, const Matrix& h2, const ModulePartition& p,
                     const NegativeSample& negatives, double temperature);
double info_nce_loss(const Matrix& h1, const Matrix& h2, const ModulePartition& p,
                     const ContrastiveConfig& cfg, std::uint64_t seed);

ad::Var info_nce_var(const ad::Var& h1, const ad::Var& h2, const ModulePartition& p,
                     const NegativeSample& negatives, double temperature);

/// Loss and gradients (one per weight, one per bias) for one view pair.
struct EncoderGradient {
  double loss = 0.0;
  std::vector<Matrix> weight_grads;
  std::vector<Matrix> bias_grads;
};

EncoderGradient info_nce_gradient(const BrainGraph& view1, const BrainGraph& view2,
                                  const ModulePartition& p, const NegativeSample& negatives,
                                  const EncoderParams& params, double temperature);

struct ExtractorTraining {
  EncoderParams params;
  std::vector<double> epoch_loss;
};

/// Mini-batch AdamW on the InfoNCE loss over fresh augmented views every
/// epoch. Deterministic in cfg.seed regardless of cfg.workers.
ExtractorTraining train_extractor(const std::vector<BrainGraph>& graphs,
                                  const std::vector<ModulePartition>& partitions,
                                  const ContrastiveConfig& cfg);

/// Same as above but continues from `initial`.
ExtractorTraining train_extractor(const std::vector<BrainGraph>& graphs,
                                  const std::vector<ModulePartition>& partitions,
                                  const ContrastiveConfig& cfg, EncoderParams initial);

/// Mean loss over the graphs with views and negatives fixed by `seed`.
double contrastive_objective(const std::vector<BrainGraph>& graphs,
                             const std::vector<ModulePartition>& partitions,
                             const EncoderParams& params, const ContrastiveConfig& cfg,
                             std::uint64_t seed);

Json encoder_to_json(const EncoderParams& params, const ContrastiveConfig& cfg);
EncoderParams encoder_from_json(const Json& j);

/// Flat row-major serialisation shared by the checkpoints.
Json flat_matrix(const Matrix& m);
Matrix unflat_matrix(const Json& j);

}  // namespace entangled
