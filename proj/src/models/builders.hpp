#pragma once

// Backbone factories. Each returns the feature extractor (NCHW in, NCHW out)
// and the channel width it ends with.

#include <memory>

#include "numta/nn/blocks.hpp"

namespace numta::models {

struct Backbone {
  std::unique_ptr<nn::Sequential> net;
  std::size_t features = 0;
};

Backbone resnet50_backbone();
Backbone desk_resnet_backbone();
Backbone inceptionv3_backbone();
Backbone desk_inception_backbone();
Backbone efficientnetb0_backbone();
Backbone desk_efficientnet_backbone();

inline std::unique_ptr<nn::Conv2d> make_conv(std::size_t in, std::size_t out, std::size_t kh, std::size_t kw,
                                             std::size_t stride = 1, std::size_t ph = 0, std::size_t pw = 0,
                                             std::size_t groups = 1, bool bias = false) {
  return std::make_unique<nn::Conv2d>(nn::Conv2dOptions{.in_channels = in,
                                                        .out_channels = out,
                                                        .kernel = {kh, kw},
                                                        .stride = {stride, stride},
                                                        .padding = {ph, pw},
                                                        .groups = groups,
                                                        .bias = bias});
}

inline std::unique_ptr<nn::Activation> make_act(nn::ActivationKind kind) {
  return std::make_unique<nn::Activation>(kind);
}

}  // namespace numta::models
