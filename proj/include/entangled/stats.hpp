#pragma once

#include <span>
#include <vector>

namespace entangled {

/// 1-based ranks with ties sharing their average rank. Sorted neighbours
/// within `rel_tol` (relative) of a run's first value join that run.
std::vector<double> average_ranks(std::span<const double> values, double rel_tol = 0.0);

double pearson(std::span<const double> a, std::span<const double> b);

struct SpearmanResult {
  double rho = 1.0;
  /// Set when either input is constant (within the tolerance); rho is then reported as 1.0.
  bool ties = false;
};

SpearmanResult spearman(std::span<const double> a, std::span<const double> b, double rel_tol = 0.0);

double mean(std::span<const double> v);
double stddev(std::span<const double> v);

}  // namespace entangled
