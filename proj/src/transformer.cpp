#include "entangled/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "entangled/encoder.hpp"
#include "entangled/error.hpp"
#include "entangled/optimizer.hpp"
#include "entangled/parallel.hpp"
#include "entangled/rng.hpp"

namespace entangled {
namespace {

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform(-bound, bound);
    }
  }
  return m;
}

Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  const double keep = 1.0 / (1.0 - p);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      m(r, c) = rng.uniform() < p ? 0.0 : keep;
    }
  }
  return m;
}

struct ParamVars {
  ad::Var input_weight, input_bias, importance;
  struct Layer {
    ad::Var query, key, value, ffn_in, ffn_out;
  };
  std::vector<Layer> layers;
  ad::Var classifier_weight, classifier_bias;

  std::vector<ad::Var> all() const {
    std::vector<ad::Var> out{input_weight, input_bias, importance};
    for (const auto& l : layers) {
      out.insert(out.end(), {l.query, l.key, l.value, l.ffn_in, l.ffn_out});
    }
    out.push_back(classifier_weight);
    out.push_back(classifier_bias);
    return out;
  }
};

ParamVars wrap(const ModelParams& p, bool trainable) {
  auto v = [trainable](const Matrix& m) { return trainable ? ad::parameter(m) : ad::constant(m); };
  ParamVars out{v(p.input_weight), v(p.input_bias), v(p.importance), {}, v(p.classifier_weight),
                v(p.classifier_bias)};
  for (const auto& l : p.layers) {
    out.layers.push_back({v(l.query), v(l.key), v(l.value), v(l.ffn_in), v(l.ffn_out)});
  }
  return out;
}

void check_input(const GraphInput& in, const ModelConfig& cfg) {
  const auto n = static_cast<std::size_t>(in.features.rows());
  if (static_cast<std::size_t>(in.features.cols()) != cfg.input_dim) {
    throw Error(ErrorKind::ShapeMismatch, "feature dimension differs from the model input dimension");
  }
  if (cfg.use_importance && in.buckets.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "one importance bucket per node is required");
  }
  if (cfg.use_module_attention &&
      (static_cast<std::size_t>(in.module_repr.rows()) != n ||
       static_cast<std::size_t>(in.module_repr.cols()) != cfg.extractor_dim)) {
    throw Error(ErrorKind::ShapeMismatch, "module representations must be n x extractor_dim");
  }
}

// Node representations after the last layer.
// `repr` replaces in.module_repr when the extractor is being tuned.
ad::Var forward_nodes(const GraphInput& in, const ParamVars& p, const ModelConfig& cfg,
                      const ForwardOptions& opts, const ad::Var* repr = nullptr) {
  check_input(in, cfg);
  const auto n = static_cast<std::size_t>(in.features.rows());
  const bool drop = opts.training && cfg.dropout > 0.0;
  ad::Var x = ad::add_row(ad::matmul(ad::constant(in.features), p.input_weight), p.input_bias);
  if (cfg.use_importance) {
    x = ad::add(x, ad::gather_rows(p.importance, in.buckets));
  }
  const ad::Var module_repr =
      repr != nullptr ? *repr : ad::constant(cfg.use_module_attention ? in.module_repr : Matrix());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const auto& layer = p.layers[l];
    const ad::Var attn_in = cfg.use_module_attention ? module_repr : x;
    ad::Var attn = fm_attention_var(attn_in, layer.query, layer.key, layer.value, cfg.heads);
    if (drop) {
      attn = ad::hadamard(attn, ad::constant(dropout_mask(n, cfg.hidden_dim, cfg.dropout,
                                                          derive_seed(opts.dropout_seed, 2 * l))));
    }
    const ad::Var mixed = ad::add(x, attn);
    x = ad::matmul(ad::relu(ad::matmul(mixed, layer.ffn_in)), layer.ffn_out);
    if (drop) {
      x = ad::hadamard(x, ad::constant(dropout_mask(n, cfg.hidden_dim, cfg.dropout,
                                                    derive_seed(opts.dropout_seed, 2 * l + 1))));
    }
  }
  return x;
}

ad::Var forward_logits(const GraphInput& in, const ParamVars& p, const ModelConfig& cfg,
                       const ForwardOptions& opts, const ad::Var* repr = nullptr) {
  const ad::Var pooled = ad::mean_rows(forward_nodes(in, p, cfg, opts, repr));
  return ad::add(ad::matmul(pooled, p.classifier_weight), p.classifier_bias);
}

double norm_inf_operator(const Matrix& stored) {
  // Stored as in x d_K; the map acting on h is its transpose.
  return stored.cwiseAbs().colwise().sum().maxCoeff();
}

double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues().size() == 0 ? 0.0 : svd.singularValues()(0);
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim == 0 || hidden_dim == 0 || ffn_dim == 0 || layers == 0 || buckets == 0 ||
      num_classes < 2 || extractor_dim == 0) {
    throw Error(ErrorKind::InvalidConfig, "model dimensions must be positive, layers >= 1, classes >= 2");
  }
  if (heads == 0 || hidden_dim % heads != 0) {
    throw Error(ErrorKind::InvalidConfig, "heads must divide the attention width");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw Error(ErrorKind::InvalidConfig, "dropout must lie in [0, 1)");
  }
}

std::vector<Matrix*> ModelParams::tensors() {
  std::vector<Matrix*> out{&input_weight, &input_bias, &importance};
  for (auto& l : layers) {
    out.insert(out.end(), {&l.query, &l.key, &l.value, &l.ffn_in, &l.ffn_out});
  }
  out.push_back(&classifier_weight);
  out.push_back(&classifier_bias);
  return out;
}

std::vector<const Matrix*> ModelParams::tensors() const {
  auto mut = const_cast<ModelParams*>(this)->tensors();
  return {mut.begin(), mut.end()};
}

ModelParams init_model(const ModelConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ModelParams p;
  const auto d = cfg.hidden_dim;
  const auto a = cfg.attention_input_dim();
  p.input_weight = uniform_matrix(rng, cfg.input_dim, d);
  p.input_bias = Matrix::Zero(1, d);
  p.importance = 0.1 * uniform_matrix(rng, cfg.buckets, d);
  for (std::size_t l = 0; l < cfg.layers; ++l) {
    AttentionLayerParams layer;
    layer.query = uniform_matrix(rng, a, d);
    layer.key = uniform_matrix(rng, a, d);
    layer.value = uniform_matrix(rng, a, d);
    layer.ffn_in = uniform_matrix(rng, d, cfg.ffn_dim);
    layer.ffn_out = uniform_matrix(rng, cfg.ffn_dim, d);
    p.layers.push_back(std::move(layer));
  }
  p.classifier_weight = uniform_matrix(rng, d, cfg.num_classes);
  p.classifier_bias = Matrix::Zero(1, cfg.num_classes);
  return p;
}

std::vector<std::size_t> importance_buckets(std::span<const double> ne, std::size_t buckets) {
  if (buckets == 0) {
    throw Error(ErrorKind::InvalidConfig, "bucket count must be positive");
  }
  const auto n = ne.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ne[a] < ne[b]; });
  std::vector<std::size_t> out(n);
  std::size_t rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (k == 0 || ne[order[k]] != ne[order[k - 1]]) {
      rank = k;
    }
    out[order[k]] = std::min(buckets - 1, buckets * rank / n);
  }
  return out;
}

Matrix importance_encode(const Matrix& x, std::span<const double> ne, const Matrix& table) {
  if (static_cast<std::size_t>(x.rows()) != ne.size() || x.cols() != table.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "importance encoding: dimensions do not match");
  }
  const auto buckets = importance_buckets(ne, static_cast<std::size_t>(table.rows()));
  Matrix out = x;
  for (std::size_t i = 0; i < buckets.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) += table.row(static_cast<Eigen::Index>(buckets[i]));
  }
  return out;
}

ad::Var fm_attention_var(const ad::Var& h, const ad::Var& query, const ad::Var& key,
                         const ad::Var& value, std::size_t heads) {
  const auto width = query.cols();
  if (heads == 0 || width % static_cast<Eigen::Index>(heads) != 0) {
    throw Error(ErrorKind::InvalidConfig, "heads must divide the attention width");
  }
  if (h.cols() != query.rows() || key.rows() != query.rows() || value.rows() != query.rows() ||
      key.cols() != width || value.cols() != width) {
    throw Error(ErrorKind::ShapeMismatch, "attention projections do not match the representation width");
  }
  const auto head_dim = width / static_cast<Eigen::Index>(heads);
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const ad::Var q = ad::matmul(h, query);
  const ad::Var k = ad::matmul(h, key);
  const ad::Var v = ad::matmul(h, value);
  std::vector<ad::Var> outs;
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const auto start = static_cast<Eigen::Index>(hd) * head_dim;
    const ad::Var qh = ad::slice_cols(q, start, head_dim);
    const ad::Var kh = ad::slice_cols(k, start, head_dim);
    const ad::Var vh = ad::slice_cols(v, start, head_dim);
    const ad::Var weights = ad::softmax_rows(ad::scale(ad::matmul(qh, ad::transpose(kh)), inv_sqrt));
    outs.push_back(ad::matmul(weights, vh));
  }
  return heads == 1 ? outs.front() : ad::concat_cols(outs);
}

Matrix fm_attention(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads) {
  return fm_attention_var(ad::constant(h), ad::constant(layer.query), ad::constant(layer.key),
                          ad::constant(layer.value), heads)
      .value();
}

Matrix attention_weights(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads) {
  const auto width = layer.query.cols();
  if (heads == 0 || width % static_cast<Eigen::Index>(heads) != 0) {
    throw Error(ErrorKind::InvalidConfig, "heads must divide the attention width");
  }
  const auto head_dim = width / static_cast<Eigen::Index>(heads);
  const Matrix q = h * layer.query;
  const Matrix k = h * layer.key;
  Matrix avg = Matrix::Zero(h.rows(), h.rows());
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const auto start = static_cast<Eigen::Index>(hd) * head_dim;
    const ad::Var logits = ad::constant(q.middleCols(start, head_dim) * k.middleCols(start, head_dim).transpose() /
                                        std::sqrt(static_cast<double>(head_dim)));
    avg += ad::softmax_rows(logits).value();
  }
  return avg / static_cast<double>(heads);
}

Matrix layer_forward(const Matrix& x, const Matrix& attention_input, const AttentionLayerParams& layer,
                     std::size_t heads) {
  const Matrix mixed = x + fm_attention(attention_input, layer, heads);
  if (mixed.cols() != layer.ffn_in.rows()) {
    throw Error(ErrorKind::ShapeMismatch, "feed-forward input width differs from the layer width");
  }
  return (mixed * layer.ffn_in).cwiseMax(0.0) * layer.ffn_out;
}

Matrix node_representations(const GraphInput& in, const ModelParams& params, const ModelConfig& cfg) {
  return forward_nodes(in, wrap(params, false), cfg, {}).value();
}

std::vector<double> classify(const GraphInput& in, const ModelParams& params, const ModelConfig& cfg) {
  const Matrix logits = forward_logits(in, wrap(params, false), cfg, {}).value();
  const double m = logits.maxCoeff();
  Eigen::RowVectorXd e = (logits.row(0).array() - m).exp().matrix();
  e /= e.sum();
  return {e.data(), e.data() + e.size()};
}

std::vector<Matrix> attention_maps(const GraphInput& in, const ModelParams& params, const ModelConfig& cfg) {
  check_input(in, cfg);
  Matrix x = (in.features * params.input_weight).rowwise() + params.input_bias.row(0);
  if (cfg.use_importance) {
    for (std::size_t i = 0; i < in.buckets.size(); ++i) {
      x.row(static_cast<Eigen::Index>(i)) += params.importance.row(static_cast<Eigen::Index>(in.buckets[i]));
    }
  }
  std::vector<Matrix> maps;
  for (const auto& layer : params.layers) {
    const Matrix& attn_in = cfg.use_module_attention ? in.module_repr : x;
    maps.push_back(attention_weights(attn_in, layer, cfg.heads));
    x = layer_forward(x, attn_in, layer, cfg.heads);
  }
  return maps;
}

LossGradient classifier_gradient(const GraphInput& in, std::size_t label, const ModelParams& params,
                                 const ModelConfig& cfg, const ForwardOptions& opts) {
  const ParamVars vars = wrap(params, true);
  const ad::Var loss = ad::cross_entropy(forward_logits(in, vars, cfg, opts), label);
  ad::backward(loss);
  LossGradient out;
  out.loss = loss.value()(0, 0);
  for (const auto& v : vars.all()) {
    out.grads.push_back(v.grad());
  }
  return out;
}

LossGradient joint_gradient(const BrainGraph& g, const GraphInput& in, std::size_t label,
                            const ModelParams& params, const EncoderParams& extractor, const ModelConfig& cfg,
                            const ForwardOptions& opts) {
  if (!cfg.use_module_attention) {
    throw Error(ErrorKind::InvalidConfig, "joint tuning needs module attention");
  }
  const ParamVars vars = wrap(params, true);
  std::vector<ad::Var> w, b;
  for (const auto& layer : extractor.layers) {
    w.push_back(ad::parameter(layer.weight));
    b.push_back(ad::parameter(layer.bias));
  }
  const ad::Var repr = encode_var(g, w, b);
  const ad::Var loss = ad::cross_entropy(forward_logits(in, vars, cfg, opts, &repr), label);
  ad::backward(loss);
  LossGradient out;
  out.loss = loss.value()(0, 0);
  for (const auto& v : vars.all()) {
    out.grads.push_back(v.grad());
  }
  for (std::size_t l = 0; l < w.size(); ++l) {
    out.grads.push_back(w[l].grad());
    out.grads.push_back(b[l].grad());
  }
  return out;
}

double classifier_loss(const GraphInput& in, std::size_t label, const ModelParams& params,
                       const ModelConfig& cfg, const ForwardOptions& opts) {
  return ad::cross_entropy(forward_logits(in, wrap(params, false), cfg, opts), label).value()(0, 0);
}

double lipschitz_bound(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads) {
  const auto width = layer.query.cols();
  if (heads == 0 || width % static_cast<Eigen::Index>(heads) != 0) {
    throw Error(ErrorKind::InvalidConfig, "heads must divide the attention width");
  }
  const auto head_dim = width / static_cast<Eigen::Index>(heads);
  const double n = static_cast<double>(h.rows());
  const double c_psi = h.rowwise().norm().maxCoeff();
  double sum_sq = 0.0;
  for (std::size_t hd = 0; hd < heads; ++hd) {
    const auto start = static_cast<Eigen::Index>(hd) * head_dim;
    const double c_value = spectral_norm(layer.value.middleCols(start, head_dim));
    const double q_inf = norm_inf_operator(layer.query.middleCols(start, head_dim));
    const double k_inf = norm_inf_operator(layer.key.middleCols(start, head_dim));
    const double c_head = std::sqrt(n / static_cast<double>(head_dim)) * c_value * c_psi * q_inf * k_inf;
    sum_sq += c_head * c_head;
  }
  return std::sqrt(sum_sq);
}

LipschitzReport lipschitz_check(const Matrix& h, const AttentionLayerParams& layer, std::size_t heads,
                                std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  LipschitzReport r;
  r.bound = lipschitz_bound(h, layer, heads);
  const Matrix out = fm_attention(h, layer, heads);
  for (auto [a, b] : pairs) {
    if (a >= static_cast<std::size_t>(h.rows()) || b >= static_cast<std::size_t>(h.rows())) {
      throw Error(ErrorKind::InvalidInput, "pair index out of range");
    }
    const double den = (h.row(a) - h.row(b)).norm();
    if (h.row(a) == h.row(b) || den < 1e-12) {
      ++r.skipped;
      continue;
    }
    r.max_ratio = std::max(r.max_ratio, (out.row(a) - out.row(b)).norm() / den);
    ++r.evaluated;
  }
  return r;
}

Json model_to_json(const ModelParams& params, const ModelConfig& cfg) {
  Json tensors = Json::array();
  for (const auto* t : params.tensors()) {
    tensors.push_back(flat_matrix(*t));
  }
  Json boundaries = Json::array();
  for (std::size_t b = 1; b < cfg.buckets; ++b) {
    boundaries.push_back(static_cast<double>(b) / static_cast<double>(cfg.buckets));
  }
  return Json{{"config",
               {{"input_dim", cfg.input_dim},
                {"hidden_dim", cfg.hidden_dim},
                {"heads", cfg.heads},
                {"ffn_dim", cfg.ffn_dim},
                {"layers", cfg.layers},
                {"buckets", cfg.buckets},
                {"num_classes", cfg.num_classes},
                {"extractor_dim", cfg.extractor_dim},
                {"dropout", cfg.dropout},
                {"use_importance", cfg.use_importance},
                {"use_module_attention", cfg.use_module_attention}}},
              {"seed", cfg.seed},
              {"bucket_rule", "rank-quantile"},
              {"bucket_rank_boundaries", std::move(boundaries)},
              {"tensors", std::move(tensors)}};
}

ModelParams model_from_json(const Json& j, ModelConfig* cfg_out) {
  ModelConfig cfg;
  try {
    const auto& c = j.at("config");
    cfg.input_dim = c.at("input_dim").get<std::size_t>();
    cfg.hidden_dim = c.at("hidden_dim").get<std::size_t>();
    cfg.heads = c.at("heads").get<std::size_t>();
    cfg.ffn_dim = c.at("ffn_dim").get<std::size_t>();
    cfg.layers = c.at("layers").get<std::size_t>();
    cfg.buckets = c.at("buckets").get<std::size_t>();
    cfg.num_classes = c.at("num_classes").get<std::size_t>();
    cfg.extractor_dim = c.at("extractor_dim").get<std::size_t>();
    cfg.dropout = c.at("dropout").get<double>();
    cfg.use_importance = c.at("use_importance").get<bool>();
    cfg.use_module_attention = c.at("use_module_attention").get<bool>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
    ModelParams p = init_model(cfg);
    auto slots = p.tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != slots.size()) {
      throw Error(ErrorKind::InvalidInput, "model checkpoint tensor count does not match its config");
    }
    for (std::size_t k = 0; k < slots.size(); ++k) {
      Matrix m = unflat_matrix(tensors[k]);
      if (m.rows() != slots[k]->rows() || m.cols() != slots[k]->cols()) {
        throw Error(ErrorKind::InvalidInput, "model checkpoint tensor shape mismatch");
      }
      *slots[k] = std::move(m);
    }
    if (cfg_out) {
      *cfg_out = cfg;
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("model checkpoint: ") + e.what());
  }
}

TrainedModel train_classifier(const std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                              std::span<const std::size_t> train, std::span<const std::size_t> val,
                              const ModelConfig& model_cfg, const TrainConfig& cfg) {
  return train_classifier(inputs, labels, train, val, model_cfg, cfg, init_model(model_cfg));
}

namespace {

// Shared loop; with `graphs` and `extractor` set, the extractor is tuned too
// and the module representations of `inputs` are refreshed after every batch.
TrainedModel train_loop(std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                        std::span<const std::size_t> train, std::span<const std::size_t> val,
                        const ModelConfig& model_cfg, const TrainConfig& cfg, ModelParams initial,
                        const std::vector<BrainGraph>* graphs, EncoderParams* extractor) {
  model_cfg.validate();
  if (labels.size() != inputs.size()) {
    throw Error(ErrorKind::ShapeMismatch, "one label per graph is required");
  }
  const bool joint = extractor != nullptr;
  if (joint && (graphs == nullptr || graphs->size() != inputs.size())) {
    throw Error(ErrorKind::ShapeMismatch, "joint tuning needs one graph per input");
  }
  TrainedModel out{std::move(initial), {}, -1};
  ModelParams current = out.params;
  EncoderParams best_extractor = joint ? *extractor : EncoderParams{};
  AdamW opt({cfg.learning_rate, cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay, cfg.warmup_steps});
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);

  auto slots_of = [&] {
    auto slots = current.tensors();
    if (joint) {
      for (auto& layer : extractor->layers) {
        slots.push_back(&layer.weight);
        slots.push_back(&layer.bias);
      }
    }
    return slots;
  };
  auto refresh = [&] {
    parallel_for(inputs.size(), cfg.workers,
                 [&](std::size_t gi) { inputs[gi].module_repr = encode((*graphs)[gi], *extractor); });
  };

  // accuracy and mean cross-entropy over idx
  auto score = [&](const ModelParams& p, std::span<const std::size_t> idx) {
    if (idx.empty()) {
      return std::pair{0.0, 0.0};
    }
    std::vector<int> correct(idx.size(), 0);
    std::vector<double> nll(idx.size(), 0.0);
    parallel_for(idx.size(), cfg.workers, [&](std::size_t k) {
      const auto probs = classify(inputs[idx[k]], p, model_cfg);
      const auto pred = static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
      correct[k] = pred == labels[idx[k]] ? 1 : 0;
      nll[k] = -std::log(std::max(probs[labels[idx[k]]], 1e-300));
    });
    const auto count = static_cast<double>(idx.size());
    return std::pair{static_cast<double>(std::accumulate(correct.begin(), correct.end(), 0)) / count,
                     std::accumulate(nll.begin(), nll.end(), 0.0) / count};
  };

  double best_val = -1.0;
  double best_val_loss = INFINITY;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(train.begin(), train.end());
    Rng shuffle_rng(derive_seed(cfg.seed, 2'000'000 + epoch));
    shuffle_rng.shuffle(order);
    double loss_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const std::size_t end = std::min(order.size(), start + batch);
      std::vector<LossGradient> grads(end - start);
      parallel_for(end - start, cfg.workers, [&](std::size_t k) {
        const auto gi = order[start + k];
        const ForwardOptions opts{true, derive_seed(cfg.seed, epoch * inputs.size() + gi)};
        grads[k] = joint ? joint_gradient((*graphs)[gi], inputs[gi], labels[gi], current, *extractor, model_cfg, opts)
                         : classifier_gradient(inputs[gi], labels[gi], current, model_cfg, opts);
      });
      auto slots = slots_of();
      std::vector<Matrix> total;
      for (const auto* s : slots) {
        total.push_back(Matrix::Zero(s->rows(), s->cols()));
      }
      for (const auto& g : grads) {
        loss_total += g.loss;
        for (std::size_t t = 0; t < total.size(); ++t) {
          total[t] += g.grads[t];
        }
      }
      for (auto& t : total) {
        t /= static_cast<double>(grads.size());
      }
      opt.step(slots, total);
      if (joint) {
        refresh();
      }
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = order.empty() ? 0.0 : loss_total / static_cast<double>(order.size());
    rec.train_accuracy = score(current, train).first;
    std::tie(rec.val_accuracy, rec.val_loss) = score(current, val);
    out.history.push_back(rec);
    if (rec.val_accuracy > best_val || (rec.val_accuracy == best_val && rec.val_loss < best_val_loss)) {
      best_val = rec.val_accuracy;
      best_val_loss = rec.val_loss;
      out.best_epoch = static_cast<long>(epoch);
      out.params = current;
      if (joint) {
        best_extractor = *extractor;
      }
    }
  }
  if (joint) {
    *extractor = std::move(best_extractor);
    refresh();
  }
  return out;
}

}  // namespace

TrainedModel train_classifier(const std::vector<GraphInput>& inputs, std::span<const std::size_t> labels,
                              std::span<const std::size_t> train, std::span<const std::size_t> val,
                              const ModelConfig& model_cfg, const TrainConfig& cfg, ModelParams initial) {
  std::vector<GraphInput> copy = inputs;
  return train_loop(copy, labels, train, val, model_cfg, cfg, std::move(initial), nullptr, nullptr);
}

JointModel train_joint(const std::vector<BrainGraph>& graphs, std::vector<GraphInput> inputs,
                       std::span<const std::size_t> labels, std::span<const std::size_t> train,
                       std::span<const std::size_t> val, const ModelConfig& model_cfg, const TrainConfig& cfg,
                       ModelParams initial, EncoderParams extractor) {
  JointModel out;
  out.classifier = train_loop(inputs, labels, train, val, model_cfg, cfg, std::move(initial), &graphs, &extractor);
  out.extractor = std::move(extractor);
  out.inputs = std::move(inputs);
  return out;
}

}  // namespace entangled
