#include <doctest.h>

#include <sstream>

#include "entangled/error.hpp"
#include "entangled/graph.hpp"
#include "entangled/io.hpp"
#include "entangled/rng.hpp"
#include "entangled/synthetic.hpp"
#include "oracles.hpp"

using namespace entangled;

namespace {

Matrix random_series(std::size_t t, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(t, n);
  for (std::size_t r = 0; r < t; ++r)
    for (std::size_t c = 0; c < n; ++c) m(r, c) = rng.normal();
  return m;
}

std::vector<double> column(const Matrix& m, Eigen::Index c) { return {m.col(c).data(), m.col(c).data() + m.rows()}; }

}  // namespace

TEST_CASE("identical columns give a unit edge, anti-correlated ones none") {
  Matrix v = random_series(20, 3, 1);
  v.col(1) = v.col(0);
  v.col(2) = -v.col(0);
  const auto g = pearson_graph(TimeSeriesMatrix(v), 0.0);
  CHECK(g.weight(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_FALSE(g.has_edge(0, 2));
  CHECK_FALSE(g.has_edge(1, 2));
  CHECK(g.edge_count() == 1);
}

TEST_CASE("PCC weights agree with the covariance-formula oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Matrix v = random_series(15, 3, 100 + seed);
    v.col(1) += 0.8 * v.col(0);
    const auto g = pearson_graph(TimeSeriesMatrix(v), 0.3);
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index j = 0; j < 3; ++j) {
        if (i == j) continue;
        const double r = oracle::pcc(column(v, i), column(v, j));
        CHECK(g.features()(i, j) == doctest::Approx(r).epsilon(1e-12));
        CHECK(g.weight(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) ==
              doctest::Approx(r >= 0.3 ? r : 0.0).epsilon(1e-12));
      }
  }
}

TEST_CASE("correlations are bounded and thresholding is monotone in edge count") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TimeSeriesMatrix ts(random_series(8, 10, seed));
    const Matrix r = pearson_matrix(ts);
    CHECK(r.maxCoeff() <= 1.0 + 1e-12);
    CHECK(r.minCoeff() >= -1.0 - 1e-12);
    std::size_t previous = SIZE_MAX;
    for (double t : {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0}) {
      const auto m = pearson_graph(ts, t).edge_count();
      CHECK(m <= previous);
      previous = m;
    }
  }
}

TEST_CASE("constant ROI signal is rejected") {
  Matrix v = random_series(10, 3, 2);
  v.col(2).setConstant(4.0);
  try {
    pearson_matrix(TimeSeriesMatrix(v));
    FAIL("expected ZeroVarianceColumn");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ZeroVarianceColumn);
  }
  CHECK_THROWS_AS(pearson_graph(TimeSeriesMatrix(random_series(10, 3, 2)), -0.1), Error);
  CHECK_THROWS_AS(TimeSeriesMatrix(Matrix::Ones(1, 3)), Error);
}

TEST_CASE("laplacian closed forms") {
  CHECK(laplacian(BrainGraph::edgeless(4)).entries().isZero(0.0));

  const auto k2 = BrainGraph::from_edges(2, {{0, 1, 1.0}}, Matrix::Identity(2, 2));
  Matrix expected(2, 2);
  expected << 1, -1, -1, 1;
  CHECK(laplacian(k2).entries() == expected);

  const auto tri = BrainGraph::from_edges(3, {{0, 1, 0.5}, {1, 2, 0.5}, {0, 2, 1.0}}, Matrix::Identity(3, 3));
  const Matrix l = laplacian(tri).entries();
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(std::abs(l.row(i).sum()) <= 1e-12);
}

TEST_CASE("thresholded graphs have PSD laplacians") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = pearson_graph(TimeSeriesMatrix(random_series(12, 9, 50 + seed)), 0.0);
    const Matrix l = laplacian(g).entries();
    const auto eig = oracle::jacobi_eigen(l);
    CHECK(eig.front() >= -1e-8 * std::max(1.0, symmetric_norm2(l)));
    CHECK(l == l.transpose());
  }
}

TEST_CASE("graph validation") {
  Matrix a = Matrix::Zero(3, 3);
  a(0, 1) = 0.5;
  CHECK_THROWS_AS(BrainGraph(a, Matrix::Identity(3, 3)), Error);  // asymmetric
  a(1, 0) = 0.5;
  a(2, 2) = 1.0;
  CHECK_THROWS_AS(BrainGraph(a, Matrix::Identity(3, 3)), Error);  // self loop
  a(2, 2) = 0.0;
  a(0, 2) = a(2, 0) = -0.2;
  try {
    BrainGraph g(a, Matrix::Identity(3, 3));
    FAIL("negative weight accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NegativeWeight);
  }
  CHECK_THROWS_AS(BrainGraph(Matrix::Zero(3, 3), Matrix::Identity(2, 2)), Error);
}

TEST_CASE("forced probabilities give two disjoint cliques") {
  auto cfg = SyntheticConfig::planted(10, 2, 1.0, 0.0, 1);
  const auto ds = generate_synthetic(cfg, 9);
  const auto& g = ds.graphs[0];
  CHECK(g.edge_count() == 20);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j)
      if (i != j) CHECK(g.has_edge(i, j) == (i / 5 == j / 5));
  CHECK(ds.metadata[0].modules == std::vector<std::size_t>{0, 0, 0, 0, 0, 1, 1, 1, 1, 1});
}

TEST_CASE("synthetic generation is deterministic and validated") {
  const auto cfg = SyntheticConfig::hub_contrast(16, 6);
  const auto a = dataset_to_json(generate_synthetic(cfg, 5)).dump();
  const auto b = dataset_to_json(generate_synthetic(cfg, 5)).dump();
  const auto c = dataset_to_json(generate_synthetic(cfg, 6)).dump();
  CHECK(a == b);
  CHECK(a != c);

  auto bad = SyntheticConfig::planted(10, 2, 1.2, 0.0);
  try {
    generate_synthetic(bad, 0);
    FAIL("probability above one accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidConfig);
  }
}

TEST_CASE("hub-contrast classes differ in hub degree") {
  const auto ds = generate_synthetic(SyntheticConfig::hub_contrast(30, 10), 1);
  for (std::size_t gi = 0; gi < ds.size(); ++gi) {
    if (ds.labels[gi] == 1) {
      REQUIRE(ds.metadata[gi].hubs.size() == 2);
      const auto& g = ds.graphs[gi];
      const double mean_degree = 2.0 * static_cast<double>(g.edge_count()) / 30.0;
      for (auto h : ds.metadata[gi].hubs) CHECK(static_cast<double>(g.neighbors(h).size()) > 1.5 * mean_degree);
    } else {
      CHECK(ds.metadata[gi].hubs.empty());
    }
  }
}

TEST_CASE("splits partition the index range") {
  const auto s = random_splits(57, 3);
  std::vector<int> seen(57, 0);
  for (const auto* part : {&s.train, &s.val, &s.test})
    for (auto i : *part) ++seen[i];
  for (int v : seen) CHECK(v == 1);
  CHECK(s.train.size() == 45);
  CHECK(s.val.size() == 5);
}

TEST_CASE("time-series CSV parsing") {
  std::istringstream ok("\xEF\xBB\xBF" "a,b\n1,2\n3,5\n4,4.5\n");
  const auto ts = read_time_series_csv(ok);
  CHECK(ts.roi_names() == std::vector<std::string>{"a", "b"});
  CHECK(ts.values()(1, 1) == 5.0);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_AS(read_time_series_csv(ragged), Error);
  std::istringstream junk("a,b\n1,2\n3,x\n");
  CHECK_THROWS_AS(read_time_series_csv(junk), Error);
}

TEST_CASE("graph and dataset JSON round trip") {
  const auto ds = generate_synthetic(SyntheticConfig::hub_contrast(12, 3), 2);
  const auto back = dataset_from_json(dataset_to_json(ds));
  REQUIRE(back.size() == ds.size());
  for (std::size_t gi = 0; gi < ds.size(); ++gi) {
    CHECK(back.graphs[gi].adjacency() == ds.graphs[gi].adjacency());
    CHECK(back.graphs[gi].features() == ds.graphs[gi].features());
    CHECK(back.metadata[gi].hubs == ds.metadata[gi].hubs);
  }
  CHECK(back.splits.test == ds.splits.test);

  const Json j = Json::parse(R"({"n": 3, "edges": [[2, 1, 0.5]]})");
  CHECK_THROWS_AS(graph_from_json(j), Error);
}
