#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "tatret/tensor.hpp"

namespace tatret {

/// Adam with optional decoupled weight decay. Moment buffers attach to the
/// parameter list by position on first step.
class Adam {
 public:
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8,
                double weight_decay = 0.0)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  void set_lr(double lr) { lr_ = lr; }
  double lr() const { return lr_; }
  double weight_decay() const { return weight_decay_; }
  int64_t steps() const { return t_; }

  void step(const std::vector<Param*>& params) {
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (size_t p = 0; p < params.size(); ++p) {
        m_[p].assign(params[p]->value.size(), 0.0f);
        v_[p].assign(params[p]->value.size(), 0.0f);
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (size_t p = 0; p < params.size(); ++p) {
      Param& param = *params[p];
      for (size_t i = 0; i < param.value.size(); ++i) {
        const double g = param.grad[i];
        const double m = beta1_ * m_[p][i] + (1.0 - beta1_) * g;
        const double v = beta2_ * v_[p][i] + (1.0 - beta2_) * g * g;
        m_[p][i] = static_cast<float>(m);
        v_[p][i] = static_cast<float>(v);
        double update = lr_ * (m / bc1) / (std::sqrt(v / bc2) + eps_);
        if (weight_decay_ > 0.0) update += lr_ * weight_decay_ * param.value[i];
        param.value[i] = static_cast<float>(param.value[i] - update);
      }
    }
  }

  // Checkpoint access.
  std::vector<std::vector<float>>& moments1() { return m_; }
  std::vector<std::vector<float>>& moments2() { return v_; }
  void restore_steps(int64_t t) { t_ = t; }

 private:
  double lr_, beta1_, beta2_, eps_, weight_decay_;
  int64_t t_ = 0;
  std::vector<std::vector<float>> m_, v_;
};

}  // namespace tatret
