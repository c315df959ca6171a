#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "entangled/autograd.hpp"
#include "entangled/encoder.hpp"
#include "entangled/graph.hpp"
#include "entangled/io.hpp"

namespace entangled {

struct ModelConfig {
  std::size_t input_dim = 30;
  std::size_t hidden_dim = 32;      // d; also the attention width d_K
  std::size_t heads = 4;
  std::size_t ffn_dim = 64;
  std::size_t layers = 2;
  std::size_t buckets = 8;
  std::size_t num_classes = 2;
  std::size_t extractor_dim = 64;   // width of the module-aware representations
  double dropout = 0.1;
  bool use_importance = true;       // false: the "-NE" ablation
  bool use_module_attention = true; // false: the "-FM-Attn" ablation (plain self-attention on x)
  std::uint64_t seed = 0;

  /// Throws InvalidConfig.
  void validate() const;
  std::size_t attention_input_dim() const { return use_module_attention ? extractor_dim : hidden_dim; }
};

struct AttentionLayerParams {
  Matrix query;  // a x d_K
  Matrix key;    // a x d_K
  Matrix value;  // a x d_K, the linear value map
  Matrix ffn_in;   // d x d_ff
  Matrix ffn_out;  // d_ff x d
};

struct ModelParams {
  Matrix input_weight;  // d_in x d
  Matrix input_bias;    // 1 x d
  Matrix importance;    // B x d embedding table
  std::vector<AttentionLayerParams> layers;
  Matrix classifier_weight;  // d x C
  Matrix classifier_bias;    // 1 x C

  /// Every trainable tensor in a fixed order.
  std::vector<Matrix*> tensors();
  std::vector<const Matrix*> tensors() const;
};

ModelParams init_model(const ModelConfig& cfg);

/// Per-graph rank-quantile bucket: floor(B * rank / n) clamped to B-1, where
/// rank is the 0-based ascending rank and tied values share their lowest rank.
std::vector<std::size_t> importance_buckets(std::span<const double> ne, std::size_t buckets);

/// x_i + table[bucket(i)].
Matrix importance_encode(const Matrix& x, std::span<const double> ne, const Matrix& table);

/// Per head, weights(i, j) = softmax_j(<q_i, k_j> / sqrt(d_head)) over all
/// nodes and output_i = sum_j weights(i, j) v_j; heads are concatenated.
Matrix fm_attention(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads);

/// Head-averaged n x n attention weights.
Matrix attention_weights(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads);

ad::Var fm_attention_var(const ad::Var& h, const ad::Var& query, const ad::Var& key,
                         const ad::Var& value, std::size_t heads);

/// What the model sees of one graph.
struct GraphInput {
  Matrix features;
  std::vector<std::size_t> buckets;
  Matrix module_repr;  // extractor output; unused by the -FM-Attn ablation
};

struct ForwardOptions {
  bool training = false;
  std::uint64_t dropout_seed = 0;
};

/// One layer: x~ = x + attention, x^ = W2 ReLU(W1 x~).
Matrix layer_forward(const Matrix& x, const Matrix& attention_input, const AttentionLayerParams& layer,
                     std::size_t heads);

/// Final node representations after every layer.
Matrix node_representations(const GraphInput& in, const ModelParams& params, const ModelConfig& cfg);

/// Mean readout, linear classifier, softmax.
std::vector<double> classify(const GraphInput& in, const ModelParams& params, const ModelConfig& cfg);

/// Head-averaged attention weights of every layer in evaluation mode.
std::vector<Matrix> attention_maps(const GraphInput& in, const ModelParams& params, const ModelConfig& cfg);

struct LossGradient {
  double loss = 0.0;
  std::vector<Matrix> grads;  // aligned with ModelParams::tensors()
};

/// Cross-entropy of one graph and its gradient with respect to every tensor.
LossGradient classifier_gradient(const GraphInput& in, std::size_t label, const ModelParams& params,
                                 const ModelConfig& cfg, const ForwardOptions& opts);
/// Gradient of the same loss with the module representations recomputed from
/// `extractor`; model tensors first, then weight and bias of each extractor layer.
LossGradient joint_gradient(const BrainGraph& g, const GraphInput& in, std::size_t label,
                            const ModelParams& params, const EncoderParams& extractor, const ModelConfig& cfg,
                            const ForwardOptions& opts);
double classifier_loss(const GraphInput& in, std::size_t label, const ModelParams& params,
                       const ModelConfig& cfg, const ForwardOptions& opts);

struct LipschitzReport {
  double max_ratio = 0.0;
  double bound = 0.0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
};

/// Measures ||attn(a) - attn(b)|| / ||h_a - h_b|| over the given node pairs
/// (pairs with identical or near-identical representations are skipped) and
/// the analytic constant sqrt(n / d_head) * ||f||_2 * max_i ||h_i|| *
/// ||W_Q||_inf * ||W_K||_inf per head, combined as the root of the sum of squares.
LipschitzReport lipschitz_check(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// Analytic constant alone.
double lipschitz_bound(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads);

Json model_to_json(const ModelParams& params, const ModelConfig& cfg);
ModelParams model_from_json(const Json& j, ModelConfig* cfg = nullptr);

}  // namespace entangled

namespace entangled {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;
  std::size_t warmup_steps = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double val_loss = 0.0;
};

struct TrainedModel {
  ModelParams params;
  std::vector<EpochRecord> history;
  /// Epoch whose weights were kept (highest validation accuracy, then lowest validation loss); -1 if none.
  long best_epoch = -1;
};

/// AdamW on the mean cross-entropy of each mini-batch drawn from `train`.
/// The returned weights are the best by validation accuracy.
TrainedModel train_classifier(const std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                              std::span<const std::size_t> train, std::span<const std::size_t> val,
                              const ModelConfig& model_cfg, const TrainConfig& cfg);

TrainedModel train_classifier(const std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                              std::span<const std::size_t> train, std::span<const std::size_t> val,
                              const ModelConfig& model_cfg, const TrainConfig& cfg, ModelParams initial);

struct JointModel {
  TrainedModel classifier;
  EncoderParams extractor;        // weights from the kept epoch
  std::vector<GraphInput> inputs; // module representations recomputed with them
};

/// Same loop with the extractor tuned through the classifier loss.
JointModel train_joint(const std::vector<BrainGraph>& graphs, std::vector<GraphInput> inputs,
                       std::span<const std::size_t> labels, std::span<const std::size_t> train,
                       std::span<const std::size_t> val, const ModelConfig& model_cfg, const TrainConfig& cfg,
                       ModelParams initial, EncoderParams extractor);

}  // namespace entangled
