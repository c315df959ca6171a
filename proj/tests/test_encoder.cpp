#include <doctest.h>

#include <cmath>
#include <numeric>

#include "entangled/community.hpp"
#include "entangled/encoder.hpp"
#include "entangled/error.hpp"
#include "entangled/rng.hpp"
#include "entangled/synthetic.hpp"
#include "oracles.hpp"

using namespace entangled;

namespace {

ModulePartition partition_of(std::vector<std::size_t> a) {
  ModulePartition p;
  p.module_count = *std::max_element(a.begin(), a.end()) + 1;
  p.assignment = std::move(a);
  return p;
}

Matrix random(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

Matrix normalize_rows(Matrix m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) /= m.row(i).norm();
  return m;
}

// Straight-line recomputation of the encoder forward pass.
Matrix encode_oracle(const BrainGraph& g, const EncoderParams& params) {
  const auto n = static_cast<Eigen::Index>(g.node_count());
  Matrix h = g.features();
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    Matrix mean(n, h.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::RowVectorXd acc = h.row(i);
      double count = 1;
      for (Eigen::Index j = 0; j < n; ++j)
        if (g.adjacency()(i, j) > 0) acc += h.row(j), count += 1;
      mean.row(i) = acc / count;
    }
    Matrix next = mean * params.layers[l].weight;
    for (Eigen::Index i = 0; i < n; ++i) next.row(i) += params.layers[l].bias.row(0);
    if (l + 1 < params.layers.size()) next = next.cwiseMax(0.0);
    h = next;
  }
  return normalize_rows(h);
}

}  // namespace

TEST_CASE("edgeless graph encodes each node on its own") {
  const auto g = BrainGraph::edgeless(4);
  auto params = init_encoder(4, 3, 1, 7);
  params.layers[0].bias << 0.1, -0.2, 0.3;
  const Matrix h = encode(g, params);
  for (Eigen::Index i = 0; i < 4; ++i) {
    const Eigen::RowVectorXd raw = g.features().row(i) * params.layers[0].weight + params.layers[0].bias;
    CHECK((h.row(i) - raw / raw.norm()).norm() <= 1e-12);
  }
}

TEST_CASE("encoder matches the dense oracle and is permutation-equivariant") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Matrix adj = oracle::random_adjacency(9, 0.4, seed);
    const BrainGraph g(adj, random(9, 5, rng));
    const auto params = init_encoder(5, 6, 1 + seed % 3, seed);
    const Matrix h = encode(g, params);
    CHECK((h - encode_oracle(g, params)).cwiseAbs().maxCoeff() <= 1e-12);

    std::vector<std::size_t> perm(9);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    const Matrix hp = encode(g.permuted(perm), params);
    for (std::size_t i = 0; i < 9; ++i)
      CHECK((hp.row(static_cast<Eigen::Index>(i)) - h.row(static_cast<Eigen::Index>(perm[i]))).norm() <= 1e-12);
  }
  CHECK_THROWS_AS(encode(BrainGraph::edgeless(3), init_encoder(4, 2, 1, 0)), Error);
}

TEST_CASE("orthogonal embeddings give ln 6") {
  // Node 0 and 1 share a module, nodes 2..4 are negatives; all rows orthonormal.
  Matrix h1 = Matrix::Zero(5, 10), h2 = Matrix::Zero(5, 10);
  for (Eigen::Index i = 0; i < 5; ++i) {
    h1(i, i) = 1;
    h2(i, 5 + i) = 1;
  }
  const auto p = partition_of({0, 0, 1, 1, 1});
  NegativeSample neg;
  neg.view1 = neg.view2 = {{2, 3, 4}, {2, 3, 4}, {0, 1, 0}, {0, 1, 1}, {0, 1, 0}};
  // Every anchor: positives all exp(0) = 1 so the mean is 1; 3 + 3 negatives sum to 6.
  CHECK(info_nce_loss(h1, h2, p, neg, 1.0) == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("InfoNCE matches brute-force enumeration and sampling rules") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const Matrix h1 = normalize_rows(random(8, 4, rng));
    const Matrix h2 = normalize_rows(random(8, 4, rng));
    const auto p = partition_of({0, 0, 0, 1, 1, 0, 1, 1});
    const auto neg = sample_negatives(p, 3, seed);
    for (std::size_t i = 0; i < 8; ++i) {
      REQUIRE(neg.view1[i].size() == 3);
      for (auto j : neg.view1[i]) CHECK(p.assignment[j] != p.assignment[i]);
      for (auto j : neg.view2[i]) CHECK(p.assignment[j] != p.assignment[i]);
      std::vector<std::size_t> sorted = neg.view1[i];
      std::sort(sorted.begin(), sorted.end());
      CHECK(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());
    }
    const double tau = 0.5 + 0.1 * static_cast<double>(seed);
    CHECK(info_nce_loss(h1, h2, p, neg, tau) ==
          doctest::Approx(oracle::info_nce(h1, h2, p.assignment, neg.view1, neg.view2, tau)).epsilon(1e-12));
  }
  // Clamped to what exists outside the module.
  CHECK(sample_negatives(partition_of({0, 0, 0, 1}), 16, 0).view1[0].size() == 1);
  try {
    sample_negatives(partition_of({0, 0, 0}), 4, 0);
    FAIL("expected NoNegatives");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoNegatives);
  }
}

TEST_CASE("loss falls as positives align") {
  // node 2 stays fixed as the only negative; node 1 rotates towards its positive, node 0
  Matrix h1 = Matrix::Zero(3, 3);
  const auto p = partition_of({0, 0, 1});
  NegativeSample neg;
  neg.view1 = neg.view2 = {{2}, {2}, {0}};
  double previous = INFINITY;
  for (double angle = 1.5; angle >= 0.0; angle -= 0.25) {
    h1.row(0) << 1, 0, 0;
    h1.row(1) << std::cos(angle), std::sin(angle), 0;
    h1.row(2) << 0, 0, 1;
    const double loss = info_nce_loss(h1, h1, p, neg, 1.0);
    CHECK(std::isfinite(loss));
    CHECK(loss < previous);
    previous = loss;
  }
}

TEST_CASE("InfoNCE gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const BrainGraph g(oracle::random_adjacency(6, 0.5, seed + 40), random(6, 4, rng));
    const auto p = partition_of({0, 0, 0, 1, 1, 1});
    const auto views = make_views(g, p, 0.2, seed);
    const auto neg = sample_negatives(p, 3, seed);
    auto params = init_encoder(4, 3, 2, seed);
    // zero biases can leave an all-zero row, where normalisation has no derivative
    for (auto& layer : params.layers) layer.bias = random(1, layer.bias.cols(), rng);
    const auto analytic = info_nce_gradient(views.view1, views.view2, p, neg, params, 0.7);
    auto f = [&] { return info_nce_loss(encode(views.view1, params), encode(views.view2, params), p, neg, 0.7); };
    CHECK(analytic.loss == doctest::Approx(f()).epsilon(1e-12));
    for (std::size_t l = 0; l < params.layers.size(); ++l) {
      CHECK(oracle::relative_error(analytic.weight_grads[l], oracle::finite_difference(&params.layers[l].weight, f)) <= 1e-4);
      CHECK(oracle::relative_error(analytic.bias_grads[l], oracle::finite_difference(&params.layers[l].bias, f)) <= 1e-4);
    }
  }
}

TEST_CASE("extractor training") {
  const auto ds = generate_synthetic(SyntheticConfig::planted(16, 2, 0.8, 0.05, 6), 3);
  std::vector<ModulePartition> parts;
  for (const auto& md : ds.metadata) parts.push_back(partition_of(md.modules));
  ContrastiveConfig cfg;
  cfg.epochs = 0;
  cfg.hidden_dim = 8;
  cfg.seed = 5;
  const auto init = init_encoder(16, 8, 1, 99);
  const auto none = train_extractor(ds.graphs, parts, cfg, init);
  CHECK(none.params.layers[0].weight == init.layers[0].weight);
  CHECK(none.epoch_loss.empty());

  cfg.epochs = 10;
  cfg.batch_size = 3;
  const auto a = train_extractor(ds.graphs, parts, cfg);
  cfg.workers = 3;
  const auto b = train_extractor(ds.graphs, parts, cfg);
  CHECK(a.params.layers[0].weight == b.params.layers[0].weight);
  CHECK(a.epoch_loss == b.epoch_loss);
  CHECK(a.epoch_loss.size() == 10);

  const auto start = init_encoder(16, 8, 1, cfg.seed);
  CHECK(contrastive_objective(ds.graphs, parts, a.params, cfg, 42) <
        contrastive_objective(ds.graphs, parts, start, cfg, 42));
}

TEST_CASE("encoder checkpoint round trip") {
  const auto params = init_encoder(5, 4, 2, 3);
  const auto back = encoder_from_json(encoder_to_json(params, ContrastiveConfig{}));
  REQUIRE(back.depth() == 2);
  for (std::size_t l = 0; l < 2; ++l) {
    CHECK(back.layers[l].weight == params.layers[l].weight);
    CHECK(back.layers[l].bias == params.layers[l].bias);
  }
}
