#include "numta/training/adam.hpp"

#include <cmath>

#include "numta/core/errors.hpp"

namespace numta {

void Adam::step(const std::vector<nn::ParamRef>& params) {
  std::vector<const nn::ParamRef*> trainable;
  for (const auto& p : params)
    if (!p.is_buffer()) trainable.push_back(&p);
  if (m_.empty()) {
    for (const auto* p : trainable) {
      m_.emplace_back(p->value->size(), 0.0);
      v_.emplace_back(p->value->size(), 0.0);
    }
  }
  if (m_.size() != trainable.size()) throw TrainingError("parameter list changed between optimizer steps");

  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double lr_t = config_.learning_rate * std::sqrt(1.0 - std::pow(b2, static_cast<double>(t_))) /
                      (1.0 - std::pow(b1, static_cast<double>(t_)));
  for (std::size_t i = 0; i < trainable.size(); ++i) {
    Scalar* w = trainable[i]->value->data();
    const Scalar* g = trainable[i]->grad->data();
    auto& m = m_[i];
    auto& v = v_[i];
    const std::size_t n = m.size();
#pragma omp parallel for simd if (n > 65536)
    for (std::size_t j = 0; j < n; ++j) {
      m[j] = b1 * m[j] + (1.0 - b1) * g[j];
      v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
      w[j] -= lr_t * m[j] / (std::sqrt(v[j]) + config_.epsilon);
    }
  }
}

}  // namespace numta
