#include "entangled/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "entangled/error.hpp"

namespace entangled {

namespace {

bool close(double x, double y, double rel_tol) {
  return x == y || std::abs(x - y) <= rel_tol * std::max(std::abs(x), std::abs(y));
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values, double rel_tol) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && close(values[order[j + 1]], values[order[i]], rel_tol)) {
      ++j;
    }
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      ranks[order[k]] = avg;
    }
    i = j + 1;
  }
  return ranks;
}

double mean(std::span<const double> v) {
  if (v.empty()) {
    return 0.0;
  }
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(std::span<const double> v) {
  if (v.size() < 2) {
    return 0.0;
  }
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) {
    ss += (x - m) * (x - m);
  }
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::ShapeMismatch, "pearson: length mismatch");
  }
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

SpearmanResult spearman(std::span<const double> a, std::span<const double> b, double rel_tol) {
  if (a.size() != b.size()) {
    throw Error(ErrorKind::ShapeMismatch, "spearman: length mismatch");
  }
  auto constant = [&](std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return v.empty() || close(*lo, *hi, rel_tol);
  };
  if (constant(a) || constant(b)) {
    return {1.0, true};
  }
  const auto ra = average_ranks(a, rel_tol);
  const auto rb = average_ranks(b, rel_tol);
  return {pearson(ra, rb), false};
}

}  // namespace entangled
