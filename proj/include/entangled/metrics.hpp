#pragma once

#include <optional>
#include <span>
#include <vector>

#include "entangled/io.hpp"

namespace entangled {

struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;  // sensitivity
  std::optional<double> specificity;
  std::optional<double> f1;
  std::optional<double> auc;
  std::size_t support = 0;
};

/// Absent-class metrics are std::nullopt and serialise as null.
struct EvalReport {
  double accuracy = 0.0;
  std::optional<double> f1;
  std::optional<double> auc;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::vector<ClassMetrics> per_class;
  std::vector<std::vector<std::size_t>> confusion;  // [true][predicted]
};

/// Rank-based (Mann-Whitney) AUC with midranks for ties; nullopt when a class is absent.
std::optional<double> auc_mann_whitney(std::span<const double> scores, std::span<const std::size_t> labels,
                                       std::size_t positive_label);

/// Binary: positive class is 1 and AUC uses P(class 1). Multiclass: one-vs-rest
/// per class, macro-averaged. Predictions are the arg-max probability.
EvalReport evaluate(const std::vector<std::vector<double>>& probabilities,
                    std::span<const std::size_t> labels, std::size_t num_classes);

Json report_to_json(const EvalReport& r);

}  // namespace entangled
