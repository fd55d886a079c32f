#include "numta/preprocess/augment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "numta/core/errors.hpp"
#include "numta/preprocess/preprocess.hpp"

namespace numta {
namespace {

using Rng = std::mt19937_64;

double draw(Rng& rng, double range) {
  if (range == 0.0) return 0.0;
  return std::uniform_real_distribution<double>(-range, range)(rng);
}

double radians(double deg) { return deg * std::numbers::pi / 180.0; }

void require(bool ok, const char* what) {
  if (!ok) throw InvalidSpec(what);
}

bool nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

// Planar float working copy so photometric steps round only once.
struct Canvas {
  std::size_t h, w;
  std::vector<double> v;  // interleaved RGB

  double& at(std::size_t y, std::size_t x, std::size_t c) { return v[(y * w + x) * 3 + c]; }
  double at(std::size_t y, std::size_t x, std::size_t c) const { return v[(y * w + x) * 3 + c]; }
};

Canvas to_canvas(const ImageBuffer& img) {
  Canvas cv{img.height, img.width, std::vector<double>(img.data.begin(), img.data.end())};
  return cv;
}

ImageBuffer from_canvas(const Canvas& cv) {
  ImageBuffer out(cv.h, cv.w, 3);
  for (std::size_t i = 0; i < cv.v.size(); ++i)
    out.data[i] = static_cast<std::uint8_t>(std::clamp(std::floor(cv.v[i] + 0.5), 0.0, 255.0));
  return out;
}

double sample_bilinear(const Canvas& src, double sy, double sx, std::size_t c) {
  sy = std::clamp(sy, 0.0, static_cast<double>(src.h - 1));
  sx = std::clamp(sx, 0.0, static_cast<double>(src.w - 1));
  const auto y0 = static_cast<std::size_t>(sy), x0 = static_cast<std::size_t>(sx);
  const std::size_t y1 = std::min(y0 + 1, src.h - 1), x1 = std::min(x0 + 1, src.w - 1);
  const double fy = sy - static_cast<double>(y0), fx = sx - static_cast<double>(x0);
  const double top = src.at(y0, x0, c) * (1.0 - fx) + src.at(y0, x1, c) * fx;
  const double bottom = src.at(y1, x0, c) * (1.0 - fx) + src.at(y1, x1, c) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

void warp(Canvas& cv, const AffineParams& a) {
  if (a.rotation_deg == 0.0 && a.shear_deg == 0.0 && a.scale == 1.0 && a.tx == 0.0 && a.ty == 0.0) return;
  // Forward map on centred coordinates: rotate * shear * zoom, then translate.
  const double theta = radians(a.rotation_deg);
  const double c = std::cos(theta), sn = std::sin(theta), k = std::tan(radians(a.shear_deg));
  const double m00 = c * a.scale, m01 = (c * k + sn) * a.scale;
  const double m10 = -sn * a.scale, m11 = (-sn * k + c) * a.scale;
  const double det = m00 * m11 - m01 * m10;
  const double i00 = m11 / det, i01 = -m01 / det, i10 = -m10 / det, i11 = m00 / det;
  const double cy = (static_cast<double>(cv.h) - 1.0) / 2.0, cx = (static_cast<double>(cv.w) - 1.0) / 2.0;

  Canvas src = cv;
  for (std::size_t y = 0; y < cv.h; ++y)
    for (std::size_t x = 0; x < cv.w; ++x) {
      const double rx = static_cast<double>(x) - cx - a.tx, ry = static_cast<double>(y) - cy - a.ty;
      const double sx = i00 * rx + i01 * ry + cx, sy = i10 * rx + i11 * ry + cy;
      for (std::size_t ch = 0; ch < 3; ++ch) cv.at(y, x, ch) = sample_bilinear(src, sy, sx, ch);
    }
}

void apply_spatial(Canvas& cv, const SpatialAugment& s, Rng& rng) {
  AffineParams a;
  a.rotation_deg = draw(rng, s.rotation_deg);
  a.shear_deg = draw(rng, s.shear_deg);
  a.scale = 1.0 + draw(rng, s.zoom);
  a.tx = draw(rng, s.translation_px) + draw(rng, s.width_shift) * static_cast<double>(cv.w);
  a.ty = draw(rng, s.translation_px) + draw(rng, s.height_shift) * static_cast<double>(cv.h);
  double shift[3];
  for (double& v : shift) v = draw(rng, s.channel_shift);

  warp(cv, a);
  if (shift[0] != 0.0 || shift[1] != 0.0 || shift[2] != 0.0)
    for (std::size_t i = 0; i < cv.v.size(); ++i) cv.v[i] += shift[i % 3];
}

double luma(const Canvas& cv, std::size_t i) { return 0.299 * cv.v[3 * i] + 0.587 * cv.v[3 * i + 1] + 0.114 * cv.v[3 * i + 2]; }

void apply_photometric(Canvas& cv, const PhotometricAugment& p, Rng& rng) {
  const std::size_t pixels = cv.h * cv.w;
  const double brightness = draw(rng, p.brightness);
  const double contrast = 1.0 + draw(rng, p.contrast);
  const double saturation = 1.0 + draw(rng, p.saturation);
  const double hue = radians(draw(rng, p.hue_deg));

  if (brightness != 0.0)
    for (double& v : cv.v) v += brightness;

  if (contrast != 1.0) {
    double mean = 0.0;
    for (std::size_t i = 0; i < pixels; ++i) mean += luma(cv, i);
    mean /= static_cast<double>(pixels);
    for (double& v : cv.v) v = mean + contrast * (v - mean);
  }

  if (saturation != 1.0)
    for (std::size_t i = 0; i < pixels; ++i) {
      const double g = luma(cv, i);
      for (std::size_t c = 0; c < 3; ++c) cv.v[3 * i + c] = g + saturation * (cv.v[3 * i + c] - g);
    }

  if (hue != 0.0) {
    // Rotate chroma in YIQ space.
    const double c = std::cos(hue), s = std::sin(hue);
    for (std::size_t i = 0; i < pixels; ++i) {
      const double r = cv.v[3 * i], g = cv.v[3 * i + 1], b = cv.v[3 * i + 2];
      const double y = 0.299 * r + 0.587 * g + 0.114 * b;
      const double ci = 0.596 * r - 0.274 * g - 0.322 * b;
      const double cq = 0.211 * r - 0.523 * g + 0.312 * b;
      const double i2 = c * ci - s * cq, q2 = s * ci + c * cq;
      cv.v[3 * i] = y + 0.956 * i2 + 0.621 * q2;
      cv.v[3 * i + 1] = y - 0.272 * i2 - 0.647 * q2;
      cv.v[3 * i + 2] = y - 1.106 * i2 + 1.703 * q2;
    }
  }

  if (p.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, p.noise_sigma);
    for (double& v : cv.v) v += noise(rng);
  }
}

void apply_occlusion(Canvas& cv, const OcclusionAugment& o, Rng& rng) {
  if (o.count == 0 || o.max_box_fraction <= 0.0) return;
  const auto max_h = std::max<std::size_t>(1, static_cast<std::size_t>(o.max_box_fraction * static_cast<double>(cv.h)));
  const auto max_w = std::max<std::size_t>(1, static_cast<std::size_t>(o.max_box_fraction * static_cast<double>(cv.w)));
  for (std::size_t b = 0; b < o.count; ++b) {
    const std::size_t bh = std::uniform_int_distribution<std::size_t>(1, max_h)(rng);
    const std::size_t bw = std::uniform_int_distribution<std::size_t>(1, max_w)(rng);
    const std::size_t y0 = std::uniform_int_distribution<std::size_t>(0, cv.h - bh)(rng);
    const std::size_t x0 = std::uniform_int_distribution<std::size_t>(0, cv.w - bw)(rng);
    const double colour = static_cast<double>(std::uniform_int_distribution<int>(0, 255)(rng));
    for (std::size_t y = y0; y < y0 + bh; ++y)
      for (std::size_t x = x0; x < x0 + bw; ++x)
        for (std::size_t c = 0; c < 3; ++c) cv.at(y, x, c) = colour;
  }
}

void apply_superimpose(Canvas& cv, const SuperimposeAugment& s) {
  if (s.alpha == 0.0 || !s.donor) return;
  ImageBuffer donor = resize_bilinear(ensure_three_channels(*s.donor), cv.h, cv.w);
  for (std::size_t y = 0; y < cv.h; ++y)
    for (std::size_t x = 0; x < cv.w; ++x) {
      const std::size_t dx = s.mirror_donor ? cv.w - 1 - x : x;
      for (std::size_t c = 0; c < 3; ++c)
        cv.at(y, x, c) = s.alpha * donor.at(y, dx, c) + (1.0 - s.alpha) * cv.at(y, x, c);
    }
}

}  // namespace

void AugmentSpec::validate() const {
  const auto& s = spatial;
  require(nonneg(s.rotation_deg) && nonneg(s.translation_px) && nonneg(s.shear_deg) && nonneg(s.height_shift) &&
              nonneg(s.width_shift) && nonneg(s.zoom) && nonneg(s.channel_shift),
          "spatial ranges must be finite and non-negative");
  require(s.shear_deg < 90.0, "shear range must stay below 90 degrees");
  require(s.zoom < 1.0, "zoom range must be below 1");
  const auto& p = photometric;
  require(nonneg(p.noise_sigma) && nonneg(p.brightness) && nonneg(p.contrast) && nonneg(p.saturation) &&
              nonneg(p.hue_deg),
          "photometric ranges must be finite and non-negative");
  require(nonneg(occlusion.max_box_fraction) && occlusion.max_box_fraction <= 1.0,
          "occlusion box fraction must lie in [0, 1]");
  require(std::isfinite(superimpose.alpha) && superimpose.alpha >= 0.0 && superimpose.alpha <= 1.0,
          "superimpose alpha must lie in [0, 1]");
  require(superimpose.alpha == 0.0 || (superimpose.donor && !superimpose.donor->empty()),
          "superimpose needs a donor image when alpha > 0");
}

ImageBuffer augment(const ImageBuffer& image, const AugmentSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (image.channels != 3) throw UnsupportedChannels("augment expects a 3-channel image");
  if (image.empty()) throw InvalidDimension("cannot augment an empty image");

  Rng rng(seed);
  Canvas cv = to_canvas(image);
  apply_spatial(cv, spec.spatial, rng);
  apply_photometric(cv, spec.photometric, rng);
  apply_occlusion(cv, spec.occlusion, rng);
  apply_superimpose(cv, spec.superimpose);
  return from_canvas(cv);
}

ImageBuffer warp_affine(const ImageBuffer& image, const AffineParams& params) {
  if (image.channels != 3) throw UnsupportedChannels("warp_affine expects a 3-channel image");
  if (image.empty()) throw InvalidDimension("cannot warp an empty image");
  require(std::isfinite(params.rotation_deg) && std::isfinite(params.tx) && std::isfinite(params.ty) &&
              std::isfinite(params.scale) && params.scale > 0.0 && std::abs(params.shear_deg) < 90.0,
          "affine parameters must be finite with a positive scale");
  Canvas cv = to_canvas(image);
  warp(cv, params);
  return from_canvas(cv);
}

}  // namespace numta
