#pragma once

#include <cstddef>
#include <vector>

#include "numta/nn/layer.hpp"

namespace numta {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
};

/// Adam in the bias-corrected step-size form:
///   m = b1 m + (1-b1) g;  v = b2 v + (1-b2) g^2
///   lr_t = lr sqrt(1-b2^t) / (1-b1^t);  p -= lr_t m / (sqrt(v) + eps)
/// Moments are matched to parameters by position, so the parameter list must
/// keep the same order between steps. Buffers are skipped.
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  void step(const std::vector<nn::ParamRef>& params);
  std::size_t iterations() const { return t_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  std::size_t t_ = 0;
  std::vector<std::vector<Scalar>> m_, v_;
};

}  // namespace numta
