#pragma once

#include <cstdint>
#include <vector>

#include "numta/datasetio/dataset.hpp"
#include "numta/preprocess/augment.hpp"
#include "numta/preprocess/preprocess.hpp"

namespace numta {

/// Decoded, three-channel, 96x96 images with their labels, in manifest order.
struct ImageSet {
  std::vector<ImageBuffer> images;
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }
};

/// Decodes and resizes every record (in parallel). Throws EmptyDatasetError on
/// an empty manifest, DataError on an unlabelled record, DecodeError on a bad file.
ImageSet load_image_set(const DatasetManifest& manifest);

/// Brings an arbitrary image to the model input geometry.
ImageBuffer to_model_input(const ImageBuffer& image);

/// Preprocesses images[order[begin..end)] into an NCHW tensor. With `augment`,
/// each sample is perturbed first using a seed derived from (seed, order index).
Tensor make_batch(const ImageSet& set, const std::vector<std::size_t>& order, std::size_t begin, std::size_t end,
                  const PreprocessMode& mode, const AugmentSpec* augment = nullptr, std::uint64_t seed = 0);

}  // namespace numta
