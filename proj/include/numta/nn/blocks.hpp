#pragma once

#include <optional>

#include "numta/nn/layers.hpp"

namespace numta::nn {

/// Children run in order. A child added with an empty name shares the parent's prefix.
class Sequential final : public Layer {
 public:
  Sequential() = default;

  template <typename L>
  L& add(std::string name, std::unique_ptr<L> layer) {
    L& ref = *layer;
    children_.emplace_back(std::move(name), std::move(layer));
    return ref;
  }

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override;
  std::string_view type() const override { return "Sequential"; }

  std::size_t size() const { return children_.size(); }

 private:
  std::vector<std::pair<std::string, LayerPtr>> children_;
};

/// Runs every branch on the same input and concatenates along channels.
/// Branch names are transparent; name the layers inside them.
class Concat final : public Layer {
 public:
  Layer& add_branch(LayerPtr branch);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override;
  std::string_view type() const override { return "Concat"; }

 private:
  std::vector<LayerPtr> branches_;
  std::vector<std::size_t> widths_;
};

/// y = act(main(x) + shortcut(x)); an absent shortcut is the identity.
class Residual final : public Layer {
 public:
  Residual(LayerPtr main, LayerPtr shortcut = nullptr, std::string shortcut_name = "downsample",
           std::optional<ActivationKind> post = std::nullopt);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override;
  std::string_view type() const override { return "Residual"; }

 private:
  LayerPtr main_, shortcut_;
  std::string shortcut_name_;
  std::optional<Activation> post_;
};

/// Channel gating: x * sigmoid(expand(silu(reduce(mean_hw(x))))).
class SqueezeExcite final : public Layer {
 public:
  SqueezeExcite(std::size_t channels, std::size_t squeeze_channels);

  Tensor forward(const Tensor& x, Phase phase) override;
  Tensor backward(const Tensor& dy) override;
  void collect(const std::string& prefix, std::vector<ParamRef>& out) override;
  void release() override;
  std::string_view type() const override { return "SqueezeExcite"; }

 private:
  GlobalAvgPool pool_;
  Conv2d reduce_, expand_;
  Activation act_, gate_;
  Tensor input_, scale_;
};

}  // namespace numta::nn
