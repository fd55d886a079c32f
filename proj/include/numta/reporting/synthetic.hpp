#pragma once

#include <cstdint>
#include <filesystem>
#include <set>

#include "numta/datasetio/dataset.hpp"
#include "numta/preprocess/image.hpp"

namespace numta {

// Stand-in data in the source layout the loader expects: glyphs of the digits
// 0-9 drawn with OpenCV's vector fonts, jittered in font, scale, stroke,
// position and angle, on a tinted paper background with noise.

/// Deterministic in (digit, seed). 3-channel, size x size.
ImageBuffer render_digit(int digit, std::uint64_t seed, std::size_t size = 48);

struct SyntheticSpec {
  std::set<char> sources{'a', 'b'};
  std::size_t per_class = 10;  // per source
  std::size_t image_size = 48;
  std::uint64_t seed = 0;
};

/// Writes `<root>/training-<t>.csv` (columns filename,digit,database name) and
/// the PNGs under `<root>/training-<t>/`. Returns the manifest that a scan of
/// the same root yields. Throws IoError.
DatasetManifest write_synthetic_dataset(const std::filesystem::path& root, const SyntheticSpec& spec);

}  // namespace numta
