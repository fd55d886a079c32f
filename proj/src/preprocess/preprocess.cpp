#include "numta/preprocess/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "numta/core/errors.hpp"

namespace numta {

ImageBuffer resize_bilinear(const ImageBuffer& image, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw InvalidDimension("resize target must be non-zero");
  if (image.empty() || image.height == 0 || image.width == 0) throw InvalidDimension("cannot resize an empty image");
  if (out_h == image.height && out_w == image.width) return image;

  const std::size_t c_count = image.channels;
  ImageBuffer out(out_h, out_w, c_count);
  const double scale_y = static_cast<double>(image.height) / static_cast<double>(out_h);
  const double scale_x = static_cast<double>(image.width) / static_cast<double>(out_w);
  const double max_y = static_cast<double>(image.height - 1), max_x = static_cast<double>(image.width - 1);

  // Horizontal taps are the same for every row.
  std::vector<std::size_t> x0(out_w), x1(out_w);
  std::vector<double> fx(out_w);
  for (std::size_t x = 0; x < out_w; ++x) {
    const double sx = std::clamp((static_cast<double>(x) + 0.5) * scale_x - 0.5, 0.0, max_x);
    x0[x] = static_cast<std::size_t>(sx);
    x1[x] = std::min(x0[x] + 1, image.width - 1);
    fx[x] = sx - static_cast<double>(x0[x]);
  }

#pragma omp parallel for schedule(static) if (out_h * out_w > 65536)
  for (std::size_t y = 0; y < out_h; ++y) {
    const double sy = std::clamp((static_cast<double>(y) + 0.5) * scale_y - 0.5, 0.0, max_y);
    const auto y0 = static_cast<std::size_t>(sy);
    const std::size_t y1 = std::min(y0 + 1, image.height - 1);
    const double fy = sy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x)
      for (std::size_t c = 0; c < c_count; ++c) {
        const double top = image.at(y0, x0[x], c) * (1.0 - fx[x]) + image.at(y0, x1[x], c) * fx[x];
        const double bottom = image.at(y1, x0[x], c) * (1.0 - fx[x]) + image.at(y1, x1[x], c) * fx[x];
        const double v = top * (1.0 - fy) + bottom * fy;
        out.at(y, x, c) = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
      }
  }
  return out;
}

ImageBuffer ensure_three_channels(const ImageBuffer& image) {
  if (image.channels == 3) return image;
  if (image.channels != 1) throw UnsupportedChannels("expected 1 or 3 channels, got " + std::to_string(image.channels));
  ImageBuffer out(image.height, image.width, 3);
  for (std::size_t i = 0; i < image.height * image.width; ++i)
    out.data[3 * i] = out.data[3 * i + 1] = out.data[3 * i + 2] = image.data[i];
  return out;
}

std::string_view to_string(PreprocessKind kind) {
  switch (kind) {
    case PreprocessKind::caffe: return "caffe";
    case PreprocessKind::tf: return "tf";
    case PreprocessKind::torch: return "torch";
  }
  return "caffe";
}

PreprocessKind parse_preprocess_kind(std::string_view text) {
  if (text == "caffe") return PreprocessKind::caffe;
  if (text == "tf") return PreprocessKind::tf;
  if (text == "torch") return PreprocessKind::torch;
  throw ConfigError("unknown preprocess mode '" + std::string(text) + "' (expected caffe, tf or torch)");
}

PreprocessMode PreprocessMode::caffe() { return {PreprocessKind::caffe, {103.939, 116.779, 123.68}, {1.0, 1.0, 1.0}}; }
PreprocessMode PreprocessMode::tf() { return {PreprocessKind::tf, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}; }
PreprocessMode PreprocessMode::torch() { return {PreprocessKind::torch, {0.485, 0.456, 0.406}, {0.229, 0.224, 0.225}}; }

PreprocessMode PreprocessMode::defaults(PreprocessKind kind) {
  switch (kind) {
    case PreprocessKind::caffe: return caffe();
    case PreprocessKind::tf: return tf();
    case PreprocessKind::torch: return torch();
  }
  return caffe();
}

void PreprocessMode::validate() const {
  for (int c = 0; c < 3; ++c) {
    if (!std::isfinite(channel_means[c])) throw ConfigError("preprocess means must be finite");
    if (kind == PreprocessKind::torch && !(channel_stds[c] > 0.0 && std::isfinite(channel_stds[c])))
      throw ConfigError("torch-mode standard deviations must be positive");
  }
}

TensorBatch preprocess_batch(std::span<const ImageBuffer> images, const PreprocessMode& mode) {
  mode.validate();
  for (const auto& img : images)
    if (img.height != kInputSize || img.width != kInputSize || img.channels != 3 ||
        img.data.size() != kInputSize * kInputSize * 3)
      throw ShapeError("preprocess_batch expects 96x96x3 images, got " + std::to_string(img.height) + "x" +
                       std::to_string(img.width) + "x" + std::to_string(img.channels));

  TensorBatch batch;
  batch.n = images.size();
  const std::size_t pixels = kInputSize * kInputSize;
  batch.values.resize(batch.n * pixels * 3);

#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < batch.n; ++i) {
    const std::uint8_t* src = images[i].data.data();
    Scalar* dst = batch.values.data() + i * pixels * 3;
    for (std::size_t p = 0; p < pixels; ++p) {
      for (std::size_t c = 0; c < 3; ++c) {
        switch (mode.kind) {
          case PreprocessKind::caffe:
            // Output channel c is BGR channel c, i.e. RGB channel 2 - c.
            dst[3 * p + c] = static_cast<Scalar>(src[3 * p + (2 - c)]) - mode.channel_means[c];
            break;
          case PreprocessKind::tf:
            dst[3 * p + c] = static_cast<Scalar>(src[3 * p + c]) / 127.5 - 1.0;
            break;
          case PreprocessKind::torch:
            dst[3 * p + c] = (static_cast<Scalar>(src[3 * p + c]) / 255.0 - mode.channel_means[c]) / mode.channel_stds[c];
            break;
        }
      }
    }
  }
  return batch;
}

Tensor to_nchw(const TensorBatch& batch) {
  Tensor out({batch.n, batch.channels, batch.height, batch.width});
  const std::size_t pixels = batch.height * batch.width;
  for (std::size_t i = 0; i < batch.n; ++i)
    for (std::size_t p = 0; p < pixels; ++p)
      for (std::size_t c = 0; c < batch.channels; ++c)
        out[(i * batch.channels + c) * pixels + p] = batch.values[(i * pixels + p) * batch.channels + c];
  return out;
}

}  // namespace numta
