#pragma once

#include <cstdint>
#include <optional>

#include "numta/preprocess/image.hpp"

namespace numta {

// Every range r below is symmetric: a value is drawn uniformly from [-r, r]
// (zoom draws a scale from [1 - r, 1 + r]). Zero disables that step.

struct SpatialAugment {
  double rotation_deg = 0.0;   // positive turns content counter-clockwise
  double translation_px = 0.0; // drawn independently for x and y
  double shear_deg = 0.0;
  double height_shift = 0.0;   // fraction of height
  double width_shift = 0.0;    // fraction of width
  double zoom = 0.0;
  double channel_shift = 0.0;  // intensity offset, drawn per channel
};

struct PhotometricAugment {
  double noise_sigma = 0.0;  // gaussian, intensity units
  double brightness = 0.0;   // additive, intensity units
  double contrast = 0.0;     // factor range around 1, pivot is the image mean
  double saturation = 0.0;   // factor range around 1, pivot is the pixel luma
  double hue_deg = 0.0;      // rotation of the chroma plane
};

struct OcclusionAugment {
  std::size_t count = 0;         // opaque boxes drawn
  double max_box_fraction = 0.0; // max box side as a fraction of the image side
};

/// out = alpha * donor + (1 - alpha) * image. The donor is resized to the image.
struct SuperimposeAugment {
  double alpha = 0.0;
  std::optional<ImageBuffer> donor;
  bool mirror_donor = false;  // flip left-right, as if seen through the page
};

struct AugmentSpec {
  SpatialAugment spatial;
  PhotometricAugment photometric;
  OcclusionAugment occlusion;
  SuperimposeAugment superimpose;

  /// Throws InvalidSpec on negative, non-finite or out-of-range values.
  void validate() const;
};

/// Same size as the input, deterministic in `seed`. Regions moved in from
/// outside the frame take the nearest border colour. Input must be 3-channel.
ImageBuffer augment(const ImageBuffer& image, const AugmentSpec& spec, std::uint64_t seed);

/// One concrete geometric transform about the image centre. Positive rotation
/// turns content counter-clockwise; tx/ty are in pixels.
struct AffineParams {
  double rotation_deg = 0.0;
  double shear_deg = 0.0;
  double scale = 1.0;
  double tx = 0.0;
  double ty = 0.0;
};

/// Inverse-mapped bilinear warp with border replication. Input must be 3-channel.
ImageBuffer warp_affine(const ImageBuffer& image, const AffineParams& params);

}  // namespace numta
