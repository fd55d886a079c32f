#include "numta/nn/blocks.hpp"

#include <stdexcept>

#include "numta/core/errors.hpp"

namespace numta::nn {
namespace {

std::string child_prefix(const std::string& prefix, const std::string& name) {
  return name.empty() ? prefix : prefix + name + ".";
}

void add_into(Tensor& acc, const Tensor& x) {
  if (acc.shape() != x.shape()) throw ShapeError("cannot add " + shape_string(x.shape()) + " to " + shape_string(acc.shape()));
  Scalar* a = acc.data();
  const Scalar* b = x.data();
  const std::size_t size = acc.size();
#pragma omp parallel for simd schedule(static) if (size > 65536)
  for (std::size_t i = 0; i < size; ++i) a[i] += b[i];
}

}  // namespace

// ---------------------------------------------------------------- Sequential

Tensor Sequential::forward(const Tensor& x, Phase phase) {
  Tensor h = x;
  for (auto& [name, layer] : children_) h = layer->forward(h, phase);
  return h;
}

Tensor Sequential::backward(const Tensor& dy) {
  Tensor g = dy;
  for (auto it = children_.rbegin(); it != children_.rend(); ++it) g = it->second->backward(g);
  return g;
}

void Sequential::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  for (auto& [name, layer] : children_) layer->collect(child_prefix(prefix, name), out);
}

void Sequential::release() {
  for (auto& child : children_) child.second->release();
}

// ---------------------------------------------------------------- Concat

Layer& Concat::add_branch(LayerPtr branch) {
  branches_.push_back(std::move(branch));
  return *branches_.back();
}

Tensor Concat::forward(const Tensor& x, Phase phase) {
  std::vector<Tensor> parts;
  parts.reserve(branches_.size());
  for (auto& b : branches_) parts.push_back(b->forward(x, phase));
  if (phase == Phase::train) {
    widths_.clear();
    for (const auto& p : parts) widths_.push_back(p.dim(1));
  }
  return concat_channels(parts);
}

Tensor Concat::backward(const Tensor& dy) {
  if (widths_.size() != branches_.size()) throw std::logic_error("Concat: backward before forward");
  Tensor dx;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < branches_.size(); ++i) {
    Tensor g = branches_[i]->backward(slice_channels(dy, offset, widths_[i]));
    offset += widths_[i];
    if (dx.empty())
      dx = std::move(g);
    else
      add_into(dx, g);
  }
  return dx;
}

void Concat::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  for (auto& b : branches_) b->collect(prefix, out);
}

void Concat::release() {
  for (auto& b : branches_) b->release();
}

// ---------------------------------------------------------------- Residual

Residual::Residual(LayerPtr main, LayerPtr shortcut, std::string shortcut_name, std::optional<ActivationKind> post)
    : main_(std::move(main)), shortcut_(std::move(shortcut)), shortcut_name_(std::move(shortcut_name)) {
  if (post) post_.emplace(*post);
}

Tensor Residual::forward(const Tensor& x, Phase phase) {
  Tensor sum = main_->forward(x, phase);
  if (shortcut_)
    add_into(sum, shortcut_->forward(x, phase));
  else
    add_into(sum, x);
  return post_ ? post_->forward(sum, phase) : sum;
}

Tensor Residual::backward(const Tensor& dy) {
  const Tensor dsum = post_ ? post_->backward(dy) : dy;
  Tensor dx = main_->backward(dsum);
  add_into(dx, shortcut_ ? shortcut_->backward(dsum) : dsum);
  return dx;
}

void Residual::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  main_->collect(prefix, out);
  if (shortcut_) shortcut_->collect(child_prefix(prefix, shortcut_name_), out);
}

void Residual::release() {
  main_->release();
  if (shortcut_) shortcut_->release();
  if (post_) post_->release();
}

// ---------------------------------------------------------------- SqueezeExcite

SqueezeExcite::SqueezeExcite(std::size_t channels, std::size_t squeeze_channels)
    : reduce_(Conv2dOptions{.in_channels = channels, .out_channels = squeeze_channels, .bias = true}),
      expand_(Conv2dOptions{.in_channels = squeeze_channels, .out_channels = channels, .bias = true}),
      act_(ActivationKind::silu),
      gate_(ActivationKind::sigmoid) {}

Tensor SqueezeExcite::forward(const Tensor& x, Phase phase) {
  Tensor s = gate_.forward(expand_.forward(act_.forward(reduce_.forward(pool_.forward(x, phase), phase), phase), phase),
                           phase);
  const std::size_t planes = x.dim(0) * x.dim(1), plane = x.dim(2) * x.dim(3);
  Tensor y(x.shape());
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar* src = x.data() + p * plane;
    Scalar* dst = y.data() + p * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] * s[p];
  }
  if (phase == Phase::train) {
    input_ = x;
    scale_ = std::move(s);
  }
  return y;
}

Tensor SqueezeExcite::backward(const Tensor& dy) {
  if (input_.empty()) throw std::logic_error("SqueezeExcite: backward without a train-phase forward");
  const std::size_t planes = input_.dim(0) * input_.dim(1), plane = input_.dim(2) * input_.dim(3);
  Tensor dx(input_.shape());
  Tensor dscale(scale_.shape());
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar* g = dy.data() + p * plane;
    const Scalar* src = input_.data() + p * plane;
    Scalar* dst = dx.data() + p * plane;
    Scalar acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
      dst[i] = g[i] * scale_[p];
      acc += g[i] * src[i];
    }
    dscale[p] = acc;
  }
  add_into(dx, pool_.backward(reduce_.backward(act_.backward(expand_.backward(gate_.backward(dscale))))));
  return dx;
}

void SqueezeExcite::collect(const std::string& prefix, std::vector<ParamRef>& out) {
  reduce_.collect(prefix + "reduce.", out);
  expand_.collect(prefix + "expand.", out);
}

void SqueezeExcite::release() {
  input_ = Tensor();
  scale_ = Tensor();
  reduce_.release();
  expand_.release();
  act_.release();
  gate_.release();
}

}  // namespace numta::nn
