#pragma once

#include <cmath>
#include <vector>

#include "spoofvqa/attention.hpp"

namespace spoofvqa {

// AdamW with decoupled weight decay. Decay is applied only to parameters
// tagged decay=true (matrices and embeddings, not biases or layernorms).
class AdamW {
 public:
  struct Config {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 1e-2;
  };

  AdamW(std::vector<NamedParam> params, Config config)
      : params_(std::move(params)), config_(config) {
    for (const auto& p : params_) {
      m_.emplace_back(p.tensor.size(), 0.0);
      v_.emplace_back(p.tensor.size(), 0.0);
    }
  }

  void zero_grad() {
    for (auto& p : params_) p.tensor.zero_grad();
  }

  void step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t pi = 0; pi < params_.size(); ++pi) {
      auto vals = params_[pi].tensor.values_mut();
      auto grads = params_[pi].tensor.grad();
      auto& m = m_[pi];
      auto& v = v_[pi];
      const double wd = params_[pi].decay ? config_.weight_decay : 0.0;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const double g = grads[i];
        m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g;
        v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g * g;
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        vals[i] -= config_.lr * (mhat / (std::sqrt(vhat) + config_.eps) +
                                 wd * vals[i]);
      }
    }
  }

  const std::vector<NamedParam>& params() const { return params_; }

 private:
  std::vector<NamedParam> params_;
  Config config_;
  std::vector<std::vector<double>> m_, v_;
  long t_ = 0;
};

}  // namespace spoofvqa
