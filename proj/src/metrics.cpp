#include "entangled/metrics.hpp"

#include <algorithm>

#include "entangled/error.hpp"
#include "entangled/stats.hpp"

namespace entangled {
namespace {

std::optional<double> ratio(double num, double den) {
  if (den == 0.0) {
    return std::nullopt;
  }
  return num / den;
}

std::optional<double> macro(const std::vector<ClassMetrics>& per_class,
                            std::optional<double> ClassMetrics::*field) {
  double total = 0.0;
  for (const auto& c : per_class) {
    if (!(c.*field)) {
      return std::nullopt;
    }
    total += *(c.*field);
  }
  return total / static_cast<double>(per_class.size());
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

std::optional<double> auc_mann_whitney(std::span<const double> scores, std::span<const std::size_t> labels,
                                       std::size_t positive_label) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::ShapeMismatch, "AUC: score and label counts differ");
  }
  const auto ranks = average_ranks(scores);
  double pos_rank_sum = 0.0;
  double n_pos = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == positive_label) {
      pos_rank_sum += ranks[i];
      n_pos += 1.0;
    }
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) {
    return std::nullopt;
  }
  return (pos_rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

EvalReport evaluate(const std::vector<std::vector<double>>& probabilities,
                    std::span<const std::size_t> labels, std::size_t num_classes) {
  if (probabilities.size() != labels.size() || labels.empty()) {
    throw Error(ErrorKind::ShapeMismatch, "evaluate: need one probability vector per label");
  }
  if (num_classes < 2) {
    throw Error(ErrorKind::InvalidInput, "evaluate: at least two classes are required");
  }
  EvalReport r;
  r.confusion.assign(num_classes, std::vector<std::size_t>(num_classes, 0));
  std::size_t correct = 0;
  for (std::size_t s = 0; s < labels.size(); ++s) {
    const auto& p = probabilities[s];
    if (p.size() != num_classes || labels[s] >= num_classes) {
      throw Error(ErrorKind::ShapeMismatch, "evaluate: probability width or label out of range");
    }
    const auto pred = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    ++r.confusion[labels[s]][pred];
    correct += pred == labels[s] ? 1 : 0;
  }
  const double total = static_cast<double>(labels.size());
  r.accuracy = static_cast<double>(correct) / total;

  for (std::size_t c = 0; c < num_classes; ++c) {
    double tp = static_cast<double>(r.confusion[c][c]);
    double fn = 0.0;
    double fp = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (k != c) {
        fn += static_cast<double>(r.confusion[c][k]);
        fp += static_cast<double>(r.confusion[k][c]);
      }
    }
    const double tn = total - tp - fn - fp;
    ClassMetrics m;
    m.support = static_cast<std::size_t>(tp + fn);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    if (m.precision && m.recall) {
      m.f1 = (*m.precision + *m.recall) > 0.0
                 ? 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall)
                 : 0.0;
    } else if (m.recall && tp + fp + fn > 0.0) {
      // No positive predictions: F1 = 2TP / (2TP + FP + FN) = 0.
      m.f1 = 2.0 * tp / (2.0 * tp + fp + fn);
    }
    std::vector<double> scores(labels.size());
    for (std::size_t s = 0; s < labels.size(); ++s) {
      scores[s] = probabilities[s][c];
    }
    m.auc = auc_mann_whitney(scores, labels, c);
    r.per_class.push_back(m);
  }

  if (num_classes == 2) {
    const auto& pos = r.per_class[1];
    r.f1 = pos.f1;
    r.sensitivity = pos.recall;
    r.specificity = pos.specificity;
    r.auc = pos.auc;
  } else {
    r.f1 = macro(r.per_class, &ClassMetrics::f1);
    r.sensitivity = macro(r.per_class, &ClassMetrics::recall);
    r.specificity = macro(r.per_class, &ClassMetrics::specificity);
    r.auc = macro(r.per_class, &ClassMetrics::auc);
  }
  return r;
}

Json report_to_json(const EvalReport& r) {
  Json per_class = Json::array();
  for (const auto& c : r.per_class) {
    per_class.push_back({{"precision", optional_json(c.precision)},
                         {"sensitivity", optional_json(c.recall)},
                         {"specificity", optional_json(c.specificity)},
                         {"f1", optional_json(c.f1)},
                         {"auc", optional_json(c.auc)},
                         {"support", c.support}});
  }
  return Json{{"ACC", r.accuracy},
              {"F1", optional_json(r.f1)},
              {"AUC", optional_json(r.auc)},
              {"Sensitivity", optional_json(r.sensitivity)},
              {"Specificity", optional_json(r.specificity)},
              {"per_class", std::move(per_class)},
              {"confusion", r.confusion}};
}

}  // namespace entangled
