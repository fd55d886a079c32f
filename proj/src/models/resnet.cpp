// ResNet-50 (bottleneck v1.5: the stride sits on the 3x3 conv) and its desk variant.
// Tensor names follow the torchvision layout so converted weights load directly.

#include "builders.hpp"

namespace numta::models {
namespace {

using nn::ActivationKind;

nn::LayerPtr bottleneck(std::size_t in, std::size_t width, std::size_t stride) {
  const std::size_t out = width * 4;
  auto main = std::make_unique<nn::Sequential>();
  main->add("conv1", make_conv(in, width, 1, 1));
  main->add("bn1", std::make_unique<nn::BatchNorm2d>(width));
  main->add("relu1", make_act(ActivationKind::relu));
  main->add("conv2", make_conv(width, width, 3, 3, stride, 1, 1));
  main->add("bn2", std::make_unique<nn::BatchNorm2d>(width));
  main->add("relu2", make_act(ActivationKind::relu));
  main->add("conv3", make_conv(width, out, 1, 1));
  main->add("bn3", std::make_unique<nn::BatchNorm2d>(out));

  std::unique_ptr<nn::Sequential> shortcut;
  if (stride != 1 || in != out) {
    shortcut = std::make_unique<nn::Sequential>();
    shortcut->add("0", make_conv(in, out, 1, 1, stride));
    shortcut->add("1", std::make_unique<nn::BatchNorm2d>(out));
  }
  return std::make_unique<nn::Residual>(std::move(main), std::move(shortcut), "downsample", ActivationKind::relu);
}

std::unique_ptr<nn::Sequential> stage(std::size_t& in, std::size_t width, std::size_t blocks, std::size_t stride) {
  auto s = std::make_unique<nn::Sequential>();
  for (std::size_t b = 0; b < blocks; ++b) {
    s->add(std::to_string(b), bottleneck(in, width, b == 0 ? stride : 1));
    in = width * 4;
  }
  return s;
}

}  // namespace

Backbone resnet50_backbone() {
  auto net = std::make_unique<nn::Sequential>();
  net->add("conv1", make_conv(3, 64, 7, 7, 2, 3, 3));
  net->add("bn1", std::make_unique<nn::BatchNorm2d>(64));
  net->add("relu", make_act(ActivationKind::relu));
  net->add("maxpool", std::make_unique<nn::MaxPool2d>(3, 2, 1));
  std::size_t in = 64;
  net->add("layer1", stage(in, 64, 3, 1));
  net->add("layer2", stage(in, 128, 4, 2));
  net->add("layer3", stage(in, 256, 6, 2));
  net->add("layer4", stage(in, 512, 3, 2));
  return {std::move(net), in};
}

Backbone desk_resnet_backbone() {
  auto net = std::make_unique<nn::Sequential>();
  net->add("conv1", make_conv(3, 16, 3, 3, 2, 1, 1));
  net->add("bn1", std::make_unique<nn::BatchNorm2d>(16));
  net->add("relu", make_act(ActivationKind::relu));
  net->add("maxpool", std::make_unique<nn::MaxPool2d>(3, 2, 1));
  std::size_t in = 16;
  net->add("layer1", stage(in, 8, 1, 1));
  net->add("layer2", stage(in, 16, 1, 2));
  return {std::move(net), in};
}

}  // namespace numta::models
