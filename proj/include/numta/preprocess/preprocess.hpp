#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>

#include "numta/core/tensor.hpp"
#include "numta/preprocess/image.hpp"

namespace numta {

/// Side length every backbone consumes.
inline constexpr std::size_t kInputSize = 96;

/// Bilinear resize with half-pixel centres (align_corners = false); samples
/// outside the source are clamped to the edge. Results round half up.
ImageBuffer resize_bilinear(const ImageBuffer& image, std::size_t out_h, std::size_t out_w);

/// Gray is replicated into R, G and B; RGB passes through.
ImageBuffer ensure_three_channels(const ImageBuffer& image);

enum class PreprocessKind { caffe, tf, torch };

std::string_view to_string(PreprocessKind kind);
PreprocessKind parse_preprocess_kind(std::string_view text);

/// Normalisation convention applied before the network.
///   caffe: RGB -> BGR, subtract per-channel means (BGR order, 8-bit units), no scaling.
///   tf:    v / 127.5 - 1.
///   torch: (v / 255 - mean_c) / std_c with RGB-ordered unit-scale means.
struct PreprocessMode {
  PreprocessKind kind = PreprocessKind::caffe;
  std::array<double, 3> channel_means{103.939, 116.779, 123.68};
  std::array<double, 3> channel_stds{1.0, 1.0, 1.0};

  static PreprocessMode caffe();
  static PreprocessMode tf();
  static PreprocessMode torch();
  /// Mode with the default constants for `kind`.
  static PreprocessMode defaults(PreprocessKind kind);

  void validate() const;
};

/// n x height x width x 3, channel-last.
struct TensorBatch {
  std::size_t n = 0;
  std::size_t height = kInputSize;
  std::size_t width = kInputSize;
  std::size_t channels = 3;
  std::vector<Scalar> values;

  Scalar at(std::size_t i, std::size_t y, std::size_t x, std::size_t c) const {
    return values[((i * height + y) * width + x) * channels + c];
  }
};

/// Every image must already be 96x96x3.
TensorBatch preprocess_batch(std::span<const ImageBuffer> images, const PreprocessMode& mode);

/// Channel-last batch to the NCHW layout the layers use.
Tensor to_nchw(const TensorBatch& batch);

}  // namespace numta
