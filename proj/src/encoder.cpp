#include "entangled/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "entangled/error.hpp"
#include "entangled/optimizer.hpp"
#include "entangled/parallel.hpp"
#include "entangled/rng.hpp"

namespace entangled {

EncoderParams init_encoder(std::size_t input_dim, std::size_t hidden_dim, std::size_t depth,
                           std::uint64_t seed) {
  if (depth < 1 || input_dim < 1 || hidden_dim < 1) {
    throw Error(ErrorKind::InvalidConfig, "encoder needs depth >= 1 and positive widths");
  }
  Rng rng(seed);
  EncoderParams params;
  std::size_t d_in = input_dim;
  for (std::size_t l = 0; l < depth; ++l) {
    const double bound = std::sqrt(6.0 / static_cast<double>(d_in + hidden_dim));
    EncoderLayer layer{Matrix(d_in, hidden_dim), Matrix::Zero(1, hidden_dim)};
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        layer.weight(r, c) = rng.uniform(-bound, bound);
      }
    }
    params.layers.push_back(std::move(layer));
    d_in = hidden_dim;
  }
  return params;
}

Matrix mean_aggregation(const BrainGraph& g) {
  const auto n = g.node_count();
  Matrix m = (g.adjacency().array() > 0.0).cast<double>().matrix() + Matrix::Identity(n, n);
  const Vector counts = m.rowwise().sum();
  return m.array().colwise() / counts.array();
}

ad::Var encode_var(const BrainGraph& g, std::span<const ad::Var> weights, std::span<const ad::Var> biases) {
  if (weights.empty() || weights.size() != biases.size()) {
    throw Error(ErrorKind::ShapeMismatch, "encoder needs one bias per weight");
  }
  if (static_cast<std::size_t>(weights[0].rows()) != g.feature_dim()) {
    throw Error(ErrorKind::ShapeMismatch, "feature dimension " + std::to_string(g.feature_dim()) +
                                              " does not match encoder input " +
                                              std::to_string(weights[0].rows()));
  }
  const ad::Var agg = ad::constant(mean_aggregation(g));
  ad::Var h = ad::constant(g.features());
  for (std::size_t l = 0; l < weights.size(); ++l) {
    h = ad::add_row(ad::matmul(ad::matmul(agg, h), weights[l]), biases[l]);
    if (l + 1 < weights.size()) {
      h = ad::relu(h);
    }
  }
  return ad::row_normalize(h);
}

Matrix encode(const BrainGraph& g, const EncoderParams& params) {
  std::vector<ad::Var> w;
  std::vector<ad::Var> b;
  for (const auto& layer : params.layers) {
    w.push_back(ad::constant(layer.weight));
    b.push_back(ad::constant(layer.bias));
  }
  return encode_var(g, w, b).value();
}

NegativeSample sample_negatives(const ModulePartition& p, std::size_t count, std::uint64_t seed) {
  const auto n = p.assignment.size();
  Rng rng(seed);
  NegativeSample s;
  s.view1.resize(n);
  s.view2.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::size_t> outside;
    for (std::size_t j = 0; j < n; ++j) {
      if (p.assignment[j] != p.assignment[i]) {
        outside.push_back(j);
      }
    }
    if (outside.empty()) {
      throw Error(ErrorKind::NoNegatives, "module of node " + std::to_string(i) + " spans the graph");
    }
    const auto k = std::min(count, outside.size());
    for (auto* view : {&s.view1, &s.view2}) {
      std::vector<std::size_t> pool = outside;
      // Partial Fisher-Yates: the first k entries are the sample.
      for (std::size_t t = 0; t < k; ++t) {
        std::swap(pool[t], pool[t + rng.below(pool.size() - t)]);
      }
      (*view)[i].assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  return s;
}

ad::Var info_nce_var(const ad::Var& h1, const ad::Var& h2, const ModulePartition& p,
                     const NegativeSample& negatives, double temperature) {
  const auto n = p.assignment.size();
  if (static_cast<std::size_t>(h1.rows()) != n || static_cast<std::size_t>(h2.rows()) != n ||
      h1.cols() != h2.cols()) {
    throw Error(ErrorKind::ShapeMismatch, "view embeddings must be n x d with matching d");
  }
  if (!(temperature > 0.0)) {
    throw Error(ErrorKind::InvalidConfig, "temperature must be positive");
  }
  if (negatives.view1.size() != n || negatives.view2.size() != n) {
    throw Error(ErrorKind::ShapeMismatch, "negative sample does not cover every anchor");
  }
  Matrix pos11 = Matrix::Zero(n, n);
  Matrix pos12 = Matrix::Zero(n, n);
  Matrix neg11 = Matrix::Zero(n, n);
  Matrix neg12 = Matrix::Zero(n, n);
  double log_counts = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double count = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (p.assignment[j] == p.assignment[i]) {
        pos12(i, j) = 1.0;
        count += 1.0;
        if (j != i) {
          pos11(i, j) = 1.0;
          count += 1.0;
        }
      }
    }
    log_counts += std::log(count);
    for (auto j : negatives.view1[i]) {
      neg11(i, j) += 1.0;
    }
    for (auto j : negatives.view2[i]) {
      neg12(i, j) += 1.0;
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const ad::Var e11 = ad::exp(ad::scale(ad::matmul(h1, ad::transpose(h1)), 1.0 / temperature));
  const ad::Var e12 = ad::exp(ad::scale(ad::matmul(h1, ad::transpose(h2)), 1.0 / temperature));
  const ad::Var numerator = ad::add(ad::sum_cols(ad::hadamard(e11, ad::constant(pos11))),
                                    ad::sum_cols(ad::hadamard(e12, ad::constant(pos12))));
  const ad::Var denominator = ad::add(ad::sum_cols(ad::hadamard(e11, ad::constant(neg11))),
                                      ad::sum_cols(ad::hadamard(e12, ad::constant(neg12))));
  // -(1/n) sum_i [log(num_i / |pos_i|) - log(den_i)]
  const ad::Var raw = ad::scale(ad::sum(ad::sub(ad::log(denominator), ad::log(numerator))), inv_n);
  Matrix offset(1, 1);
  offset(0, 0) = log_counts * inv_n;
  return ad::add(raw, ad::constant(offset));
}

double info_nce_loss(const Matrix& h1, const Matrix& h2, const ModulePartition& p,
                     const NegativeSample& negatives, double temperature) {
  return info_nce_var(ad::constant(h1), ad::constant(h2), p, negatives, temperature).value()(0, 0);
}

double info_nce_loss(const Matrix& h1, const Matrix& h2, const ModulePartition& p,
                     const ContrastiveConfig& cfg, std::uint64_t seed) {
  return info_nce_loss(h1, h2, p, sample_negatives(p, cfg.negatives, seed), cfg.temperature);
}

EncoderGradient info_nce_gradient(const BrainGraph& view1, const BrainGraph& view2,
                                  const ModulePartition& p, const NegativeSample& negatives,
                                  const EncoderParams& params, double temperature) {
  std::vector<ad::Var> w;
  std::vector<ad::Var> b;
  for (const auto& layer : params.layers) {
    w.push_back(ad::parameter(layer.weight));
    b.push_back(ad::parameter(layer.bias));
  }
  const ad::Var h1 = encode_var(view1, w, b);
  const ad::Var h2 = encode_var(view2, w, b);
  const ad::Var loss = info_nce_var(h1, h2, p, negatives, temperature);
  ad::backward(loss);
  EncoderGradient g;
  g.loss = loss.value()(0, 0);
  for (std::size_t l = 0; l < w.size(); ++l) {
    g.weight_grads.push_back(w[l].grad());
    g.bias_grads.push_back(b[l].grad());
  }
  return g;
}

namespace {

struct PairDraw {
  AugmentedPair views;
  NegativeSample negatives;
};

PairDraw draw_pair(const BrainGraph& g, const ModulePartition& p, const ContrastiveConfig& cfg,
                   std::uint64_t seed) {
  return {make_views(g, p, cfg.drop_fraction, seed),
          sample_negatives(p, cfg.negatives, derive_seed(seed, 7))};
}

void check_inputs(const std::vector<BrainGraph>& graphs, const std::vector<ModulePartition>& partitions) {
  if (graphs.size() != partitions.size()) {
    throw Error(ErrorKind::ShapeMismatch, "one partition per graph is required");
  }
}

}  // namespace

ExtractorTraining train_extractor(const std::vector<BrainGraph>& graphs,
                                  const std::vector<ModulePartition>& partitions,
                                  const ContrastiveConfig& cfg) {
  check_inputs(graphs, partitions);
  if (graphs.empty()) {
    throw Error(ErrorKind::InvalidInput, "no graphs to train on");
  }
  return train_extractor(graphs, partitions, cfg,
                         init_encoder(graphs.front().feature_dim(), cfg.hidden_dim, cfg.depth, cfg.seed));
}

ExtractorTraining train_extractor(const std::vector<BrainGraph>& graphs,
                                  const std::vector<ModulePartition>& partitions,
                                  const ContrastiveConfig& cfg, EncoderParams initial) {
  check_inputs(graphs, partitions);
  ExtractorTraining out{std::move(initial), {}};
  AdamW opt({cfg.learning_rate, 0.9, 0.999, 1e-8, 0.0, 0});
  const std::size_t batch = std::max<std::size_t>(1, cfg.batch_size);
  const std::size_t count = graphs.size();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, 1'000'000 + epoch));
    shuffle_rng.shuffle(order);

    double loss_total = 0.0;
    for (std::size_t start = 0; start < count; start += batch) {
      const std::size_t end = std::min(count, start + batch);
      std::vector<EncoderGradient> grads(end - start);
      parallel_for(end - start, cfg.workers, [&](std::size_t k) {
        const auto gi = order[start + k];
        const auto draw = draw_pair(graphs[gi], partitions[gi], cfg,
                                    derive_seed(cfg.seed, epoch * count + gi));
        grads[k] = info_nce_gradient(draw.views.view1, draw.views.view2, partitions[gi],
                                     draw.negatives, out.params, cfg.temperature);
      });
      std::vector<Matrix> total;
      std::vector<Matrix*> params;
      for (auto& layer : out.params.layers) {
        total.push_back(Matrix::Zero(layer.weight.rows(), layer.weight.cols()));
        total.push_back(Matrix::Zero(1, layer.bias.cols()));
        params.push_back(&layer.weight);
        params.push_back(&layer.bias);
      }
      for (const auto& g : grads) {
        loss_total += g.loss;
        for (std::size_t l = 0; l < g.weight_grads.size(); ++l) {
          total[2 * l] += g.weight_grads[l];
          total[2 * l + 1] += g.bias_grads[l];
        }
      }
      for (auto& t : total) {
        t /= static_cast<double>(grads.size());
      }
      opt.step(params, total);
    }
    out.epoch_loss.push_back(loss_total / static_cast<double>(count));
  }
  return out;
}

double contrastive_objective(const std::vector<BrainGraph>& graphs,
                             const std::vector<ModulePartition>& partitions,
                             const EncoderParams& params, const ContrastiveConfig& cfg,
                             std::uint64_t seed) {
  check_inputs(graphs, partitions);
  std::vector<double> losses(graphs.size());
  parallel_for(graphs.size(), cfg.workers, [&](std::size_t gi) {
    const auto draw = draw_pair(graphs[gi], partitions[gi], cfg, derive_seed(seed, gi));
    losses[gi] = info_nce_loss(encode(draw.views.view1, params), encode(draw.views.view2, params),
                               partitions[gi], draw.negatives, cfg.temperature);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(graphs.size());
}

Json flat_matrix(const Matrix& m) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      data.push_back(m(r, c));
    }
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Matrix unflat_matrix(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw Error(ErrorKind::InvalidInput, "matrix data length does not match its shape");
  }
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      m(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    }
  }
  return m;
}

Json encoder_to_json(const EncoderParams& params, const ContrastiveConfig& cfg) {
  Json layers = Json::array();
  for (const auto& l : params.layers) {
    layers.push_back({{"weight", flat_matrix(l.weight)}, {"bias", flat_matrix(l.bias)}});
  }
  return Json{{"seed", cfg.seed},
              {"config",
               {{"temperature", cfg.temperature},
                {"negatives", cfg.negatives},
                {"epochs", cfg.epochs},
                {"batch_size", cfg.batch_size},
                {"learning_rate", cfg.learning_rate},
                {"drop_fraction", cfg.drop_fraction},
                {"hidden_dim", cfg.hidden_dim},
                {"depth", cfg.depth}}},
              {"layers", std::move(layers)}};
}

EncoderParams encoder_from_json(const Json& j) {
  EncoderParams p;
  try {
    for (const auto& l : j.at("layers")) {
      p.layers.push_back({unflat_matrix(l.at("weight")), unflat_matrix(l.at("bias"))});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::InvalidInput, std::string("encoder checkpoint: ") + e.what());
  }
  if (p.layers.empty()) {
    throw Error(ErrorKind::InvalidInput, "encoder checkpoint has no layers");
  }
  return p;
}

}  // namespace entangled
