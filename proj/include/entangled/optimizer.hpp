#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "entangled/graph.hpp"

namespace entangled {

struct AdamWConfig {
  double learning_rate = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 1e-4;
  std::size_t warmup_steps = 10;
};

/// Adam with decoupled weight decay and a linear learning-rate warm-up.
class AdamW {
public:
  explicit AdamW(AdamWConfig cfg) : cfg_(cfg) {}

  double current_rate() const {
    if (cfg_.warmup_steps == 0) {
      return cfg_.learning_rate;
    }
    const double ramp = static_cast<double>(step_ + 1) / static_cast<double>(cfg_.warmup_steps);
    return cfg_.learning_rate * std::min(1.0, ramp);
  }

  /// params[k] -= update from grads[k]; shapes must be stable across calls.
  void step(const std::vector<Matrix*>& params, const std::vector<Matrix>& grads) {
    if (m_.empty()) {
      for (const auto* p : params) {
        m_.push_back(Matrix::Zero(p->rows(), p->cols()));
        v_.push_back(Matrix::Zero(p->rows(), p->cols()));
      }
    }
    const double lr = current_rate();
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (std::size_t k = 0; k < params.size(); ++k) {
      Matrix& p = *params[k];
      m_[k] = cfg_.beta1 * m_[k] + (1.0 - cfg_.beta1) * grads[k];
      v_[k] = cfg_.beta2 * v_[k] + (1.0 - cfg_.beta2) * grads[k].cwiseProduct(grads[k]);
      const Matrix m_hat = m_[k] / bc1;
      const Matrix v_hat = v_[k] / bc2;
      p *= 1.0 - lr * cfg_.weight_decay;
      p -= lr * m_hat.cwiseQuotient((v_hat.array().sqrt() + cfg_.epsilon).matrix());
    }
  }

  std::size_t steps() const { return step_; }

private:
  AdamWConfig cfg_;
  std::size_t step_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace entangled
