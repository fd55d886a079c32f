// EfficientNet-B0 (MBConv with squeeze-excitation, SiLU) and its desk variant.
// Tensor names: stem.*, blocks.<i>.{expand,depthwise,se,project}.*, head.*.
// Stochastic depth is omitted.

#include <algorithm>

#include "builders.hpp"

namespace numta::models {
namespace {

using nn::ActivationKind;

struct StageSpec {
  std::size_t expand, kernel, stride, out, repeats;
};

std::unique_ptr<nn::Sequential> conv_bn(std::size_t in, std::size_t out, std::size_t k, std::size_t stride,
                                        std::size_t groups, bool act) {
  auto s = std::make_unique<nn::Sequential>();
  const std::size_t pad = (k - 1) / 2;
  s->add("conv", make_conv(in, out, k, k, stride, pad, pad, groups));
  s->add("bn", std::make_unique<nn::BatchNorm2d>(out));
  if (act) s->add("act", make_act(ActivationKind::silu));
  return s;
}

nn::LayerPtr mbconv(std::size_t in, std::size_t out, std::size_t expand, std::size_t kernel, std::size_t stride) {
  const std::size_t hidden = in * expand;
  auto main = std::make_unique<nn::Sequential>();
  if (expand != 1) main->add("expand", conv_bn(in, hidden, 1, 1, 1, true));
  main->add("depthwise", conv_bn(hidden, hidden, kernel, stride, hidden, true));
  main->add("se", std::make_unique<nn::SqueezeExcite>(hidden, std::max<std::size_t>(1, in / 4)));
  main->add("project", conv_bn(hidden, out, 1, 1, 1, false));
  if (stride == 1 && in == out) return std::make_unique<nn::Residual>(std::move(main));
  return main;
}

Backbone build(std::size_t stem, const std::vector<StageSpec>& stages, std::size_t head) {
  auto net = std::make_unique<nn::Sequential>();
  net->add("stem", conv_bn(3, stem, 3, 2, 1, true));
  auto blocks = std::make_unique<nn::Sequential>();
  std::size_t in = stem, index = 0;
  for (const auto& s : stages) {
    for (std::size_t r = 0; r < s.repeats; ++r) {
      blocks->add(std::to_string(index++), mbconv(in, s.out, s.expand, s.kernel, r == 0 ? s.stride : 1));
      in = s.out;
    }
  }
  net->add("blocks", std::move(blocks));
  net->add("head", conv_bn(in, head, 1, 1, 1, true));
  return {std::move(net), head};
}

}  // namespace

Backbone efficientnetb0_backbone() {
  return build(32,
               {{1, 3, 1, 16, 1},
                {6, 3, 2, 24, 2},
                {6, 5, 2, 40, 2},
                {6, 3, 2, 80, 3},
                {6, 5, 1, 112, 3},
                {6, 5, 2, 192, 4},
                {6, 3, 1, 320, 1}},
               1280);
}

Backbone desk_efficientnet_backbone() {
  return build(16, {{1, 3, 1, 8, 1}, {4, 3, 2, 16, 1}, {4, 5, 2, 24, 1}, {4, 3, 1, 24, 1}}, 64);
}

}  // namespace numta::models
