#pragma once

#include <cstdint>
#include <random>
#include <utility>

#include "numta/kernels/kernels.hpp"
#include "numta/nn/layer.hpp"

namespace numta::nn {

struct Conv2dOptions {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::pair<std::size_t, std::size_t> kernel{1, 1};
  std::pair<std::size_t, std::size_t> stride{1, 1};
  std::pair<std::size_t, std::size_t> padding{0, 0};
  std::size_t groups = 1;
  bool bias = false;
};

class Conv2d final : public Layer {
 public:
  explicit Conv2d(const Conv2dOptions& options);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override { input_ = Tensor(); }
  std::string_view type() const override { return "Conv2d"; }

  const Conv2dOptions& options() const { return options_; }
  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  kernels::ConvGeometry geometry(const Tensor& x) const;

  Conv2dOptions options_;
  Tensor weight_, weight_grad_, bias_, bias_grad_;
  Tensor input_;
};

class BatchNorm2d final : public Layer {
 public:
  explicit BatchNorm2d(std::size_t channels, Scalar eps = 1e-5, Scalar momentum = 0.1);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override { normalized_ = Tensor(); }
  std::string_view type() const override { return "BatchNorm2d"; }

  Tensor& gamma() { return gamma_; }
  Tensor& beta() { return beta_; }
  Tensor& running_mean() { return running_mean_; }
  Tensor& running_var() { return running_var_; }

 private:
  std::size_t channels_;
  Scalar eps_, momentum_;
  Tensor gamma_, beta_, gamma_grad_, beta_grad_;
  Tensor running_mean_, running_var_;
  Tensor normalized_;
  std::vector<Scalar> inv_std_;
};

enum class ActivationKind { relu, silu, sigmoid };

class Activation final : public Layer {
 public:
  explicit Activation(ActivationKind kind) : kind_(kind) {}

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void release() override { cache_ = Tensor(); }
  std::string_view type() const override;

 private:
  ActivationKind kind_;
  Tensor cache_;  // input for silu, output for relu/sigmoid
};

class MaxPool2d final : public Layer {
 public:
  MaxPool2d(std::size_t kernel, std::size_t stride, std::size_t padding = 0);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void release() override { input_ = Tensor(); }
  std::string_view type() const override { return "MaxPool2d"; }

 private:
  kernels::PoolGeometry geometry(const Shape& s) const;
  std::size_t kernel_, stride_, padding_;
  Tensor input_;
};

class AvgPool2d final : public Layer {
 public:
  AvgPool2d(std::size_t kernel, std::size_t stride, std::size_t padding = 0, bool count_include_pad = true);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  std::string_view type() const override { return "AvgPool2d"; }

 private:
  kernels::PoolGeometry geometry(const Shape& s) const;
  std::size_t kernel_, stride_, padding_;
  bool count_include_pad_;
  Shape input_shape_;
};

/// NCHW -> NC11.
class GlobalAvgPool final : public Layer {
 public:
  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  std::string_view type() const override { return "GlobalAvgPool"; }

 private:
  Shape input_shape_;
};

/// NCHW -> N x (C*H*W).
class Flatten final : public Layer {
 public:
  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  std::string_view type() const override { return "Flatten"; }

 private:
  Shape input_shape_;
};

/// y = x W^T + b with W stored [out, in].
class Dense final : public Layer {
 public:
  Dense(std::size_t in_features, std::size_t out_features);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override { input_ = Tensor(); }
  std::string_view type() const override { return "Dense"; }

  Tensor& weight() { return weight_; }
  Tensor& bias() { return bias_; }

 private:
  std::size_t in_, out_;
  Tensor weight_, weight_grad_, bias_, bias_grad_;
  Tensor input_;
};

}  // namespace numta::nn
