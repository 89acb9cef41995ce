#pragma once

#include <cmath>
#include <vector>

#include "piano/nn/param.hpp"

namespace piano::nn {

// Adaptive-moment gradient descent with optional cosine learning-rate decay.
class Adam {
 public:
  explicit Adam(ParamRefs params, double lr = 1e-3, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8)
      : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2),
        eps_(eps) {
    m_.resize(params_.size());
    v_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      m_[i].assign(params_[i]->size(), 0.0);
      v_[i].assign(params_[i]->size(), 0.0);
    }
  }

  // total_steps > 0 enables cosine decay of the learning rate to 0.
  void set_cosine_schedule(long total_steps) { total_steps_ = total_steps; }

  // Decoupled weight decay, applied as p -= lr * wd * p each step.
  void set_weight_decay(double wd) { wd_ = wd; }

  double current_lr() const {
    if (total_steps_ <= 0) return lr_;
    double frac = std::min(1.0, static_cast<double>(t_) / total_steps_);
    return lr_ * 0.5 * (1.0 + std::cos(M_PI * frac));
  }

  void step() {
    const double lr = current_lr();
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      Param& p = *params_[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double g = p.g[j];
        m[j] = beta1_ * m[j] + (1.0 - beta1_) * g;
        v[j] = beta2_ * v[j] + (1.0 - beta2_) * g * g;
        p.v[j] -= lr * ((m[j] / bc1) / (std::sqrt(v[j] / bc2) + eps_) +
                        wd_ * p.v[j]);
      }
    }
  }

  long step_count() const { return t_; }

 private:
  ParamRefs params_;
  double lr_, beta1_, beta2_, eps_, wd_ = 0.0;
  long t_ = 0, total_steps_ = 0;
  std::vector<std::vector<double>> m_, v_;
};

}  // namespace piano::nn
