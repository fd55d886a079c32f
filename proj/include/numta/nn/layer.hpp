#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "numta/core/tensor.hpp"

namespace numta::nn {

/// Training runs batch statistics and keeps activations for backward;
/// inference uses running statistics and keeps nothing.
enum class Phase { train, infer };

enum class ParamRole { kernel, bias, norm_scale, norm_shift, running_mean, running_var };

/// A named tensor owned by some layer. Buffers (running statistics) have no gradient.
struct ParamRef {
  std::string name;
  Tensor* value = nullptr;
  Tensor* grad = nullptr;
  ParamRole role = ParamRole::kernel;
  std::size_t fan_in = 0;  // kernels only

  bool is_buffer() const { return grad == nullptr; }
};

class Layer {
 public:
  virtual ~Layer() = default;

  virtual Tensor forward(const Tensor& x, Phase phase) = 0;
  /// Gradient w.r.t. the input of the last train-phase forward. Parameter
  /// gradients are overwritten, not accumulated.
  virtual Tensor backward(const Tensor& dy) = 0;
  /// Appends owned parameters and buffers, names prefixed by `prefix`.
  virtual void collect(const std::string& prefix, std::vector<ParamRef>& out) {
    (void)prefix;
    (void)out;
  }
  /// Drops cached activations.
  virtual void release() {}
  virtual std::string_view type() const = 0;
};

using LayerPtr = std::unique_ptr<Layer>;

}  // namespace numta::nn
