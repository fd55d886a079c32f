#include "numta/training/data_loader.hpp"

#include <exception>

#include "numta/core/errors.hpp"

namespace numta {

namespace {

// splitmix64 finaliser over (seed, index)
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

ImageBuffer to_model_input(const ImageBuffer& image) {
  auto rgb = ensure_three_channels(image);
  if (rgb.height == kInputSize && rgb.width == kInputSize) return rgb;
  return resize_bilinear(rgb, kInputSize, kInputSize);
}

ImageSet load_image_set(const DatasetManifest& manifest) {
  if (manifest.empty()) throw EmptyDatasetError("dataset is empty");
  ImageSet set;
  set.images.resize(manifest.size());
  set.labels.resize(manifest.size());
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    if (!manifest[i].label) throw DataError("record '" + manifest[i].id + "' has no label");
    set.labels[i] = *manifest[i].label;
  }
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    try {
      set.images[i] = to_model_input(load_image(manifest[i]));
    } catch (...) {
#pragma omp critical
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return set;
}

Tensor make_batch(const ImageSet& set, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                  const PreprocessMode& mode, const AugmentSpec* augment, std::uint64_t seed) {
  std::vector<ImageBuffer> picked(end - begin);
#pragma omp parallel for if (augment != nullptr)
  for (std::size_t i = begin; i < end; ++i) {
    const auto& src = set.images[order[i]];
    picked[i - begin] = augment ? numta::augment(src, *augment, mix_seed(seed, i)) : src;
  }
  return to_nchw(preprocess_batch(picked, mode));
}

}  // namespace numta
