#include <doctest.h>

#include "entangled/metrics.hpp"
#include "entangled/rng.hpp"
#include "oracles.hpp"

using namespace entangled;

namespace {

std::vector<std::vector<double>> one_hot(const std::vector<std::size_t>& pred, std::size_t classes) {
  std::vector<std::vector<double>> p;
  for (auto k : pred) {
    std::vector<double> row(classes, 0.1 / static_cast<double>(classes - 1));
    row[k] = 0.9;
    p.push_back(row);
  }
  return p;
}

std::vector<std::vector<double>> binary(const std::vector<double>& s) {
  std::vector<std::vector<double>> p;
  for (double v : s) p.push_back({1.0 - v, v});
  return p;
}

}  // namespace

TEST_CASE("perfect binary separation") {
  const std::vector<std::size_t> labels{1, 0, 1, 0, 1};
  const auto r = evaluate(binary({0.8, 0.3, 0.9, 0.1, 0.7}), labels, 2);
  CHECK(r.accuracy == 1.0);
  CHECK(*r.auc == 1.0);
  CHECK(*r.f1 == 1.0);
  CHECK(*r.sensitivity == 1.0);
  CHECK(*r.specificity == 1.0);
}

TEST_CASE("hand-counted AUC") {
  const std::vector<std::size_t> labels{1, 0, 1, 0};
  CHECK(*auc_mann_whitney(std::vector<double>{0.9, 0.4, 0.6, 0.1}, labels, 1) == 1.0);
  CHECK(*auc_mann_whitney(std::vector<double>{0.9, 0.6, 0.4, 0.1}, labels, 1) == 0.75);
  CHECK(*auc_mann_whitney(std::vector<double>{0.5, 0.5, 0.5, 0.5}, labels, 1) == 0.5);
  CHECK_FALSE(auc_mann_whitney(std::vector<double>{0.5, 0.4}, std::vector<std::size_t>{1, 1}, 1).has_value());
}

TEST_CASE("AUC equals the concordant-pair fraction") {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> scores(n);
    std::vector<std::size_t> labels(n);
    std::vector<int> positive(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = static_cast<double>(rng.below(12)) / 11.0;  // coarse grid forces ties
      labels[i] = rng.below(2);
      positive[i] = labels[i] == 1;
    }
    labels[0] = 1, positive[0] = 1;
    labels[1] = 0, positive[1] = 0;
    CHECK(*auc_mann_whitney(scores, labels, 1) == oracle::concordant_auc(scores, positive));
  }
}

TEST_CASE("three classes predicted perfectly") {
  const std::vector<std::size_t> labels{0, 1, 2, 2, 1, 0};
  const auto r = evaluate(one_hot(labels, 3), labels, 3);
  CHECK(*r.f1 == 1.0);
  CHECK(r.accuracy == 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(r.confusion[i][j] == (i == j ? 2u : 0u));
}

TEST_CASE("macro averages on a hand-computed fixture") {
  const std::vector<std::size_t> labels{0, 0, 1, 1, 2, 2};
  const std::vector<std::size_t> pred{0, 1, 1, 1, 2, 0};
  const auto r = evaluate(one_hot(pred, 3), labels, 3);
  // Per class F1: 0.5, 0.8, 2/3; recall: 0.5, 1, 0.5; specificity: 3/4, 3/4, 1.
  CHECK(*r.f1 == doctest::Approx((0.5 + 0.8 + 2.0 / 3) / 3).epsilon(1e-12));
  CHECK(*r.sensitivity == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(*r.specificity == doctest::Approx((0.75 + 0.75 + 1.0) / 3).epsilon(1e-12));
  CHECK(*r.per_class[1].precision == doctest::Approx(2.0 / 3));
  CHECK(r.accuracy == 4.0 / 6.0);

  std::size_t trace = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    trace += r.confusion[k][k];
    std::size_t row = 0;
    for (auto v : r.confusion[k]) row += v;
    CHECK(row == r.per_class[k].support);
  }
  CHECK(static_cast<double>(trace) / 6.0 == r.accuracy);
}

TEST_CASE("absent classes are undefined, not zero") {
  const std::vector<std::size_t> labels{0, 0, 0};
  const auto r = evaluate(binary({0.2, 0.7, 0.1}), labels, 2);
  CHECK_FALSE(r.auc.has_value());
  CHECK_FALSE(r.sensitivity.has_value());
  CHECK(r.specificity.has_value());
  const Json j = report_to_json(r);
  CHECK(j["AUC"].is_null());
  CHECK(j["Sensitivity"].is_null());
  CHECK(j["ACC"] == doctest::Approx(2.0 / 3));
}
