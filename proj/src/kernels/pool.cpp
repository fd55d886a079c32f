#include <algorithm>
#include <limits>

#include "numta/core/errors.hpp"
#include "numta/kernels/kernels.hpp"

namespace numta::kernels {
namespace {

struct Window {
  long y0, y1, x0, x1;  // clipped to the image
  std::size_t padded_count;
};

Window window(const PoolGeometry& g, std::size_t oy, std::size_t ox) {
  const long ys = static_cast<long>(oy * g.stride_h) - static_cast<long>(g.pad_h);
  const long xs = static_cast<long>(ox * g.stride_w) - static_cast<long>(g.pad_w);
  const long ye = ys + static_cast<long>(g.kernel_h), xe = xs + static_cast<long>(g.kernel_w);
  // The padded window is clipped to the padded extent, matching the usual avg-pool convention.
  const long ph = static_cast<long>(g.in_h + g.pad_h), pw = static_cast<long>(g.in_w + g.pad_w);
  const std::size_t padded = static_cast<std::size_t>((std::min(ye, ph) - ys) * (std::min(xe, pw) - xs));
  return {std::max(ys, 0L), std::min(ye, static_cast<long>(g.in_h)), std::max(xs, 0L),
          std::min(xe, static_cast<long>(g.in_w)), padded};
}

void check(const PoolGeometry& g) {
  if (!g.valid()) throw ShapeError("invalid pooling geometry");
}

}  // namespace

bool PoolGeometry::valid() const {
  return batch > 0 && channels > 0 && kernel_h > 0 && kernel_w > 0 && stride_h > 0 && stride_w > 0 &&
         in_h + 2 * pad_h >= kernel_h && in_w + 2 * pad_w >= kernel_w && pad_h < kernel_h && pad_w < kernel_w;
}

void max_pool_forward(const PoolGeometry& g, const Scalar* x, Scalar* y) {
  check(g);
  const std::size_t oh = g.out_h(), ow = g.out_w(), planes = g.batch * g.channels;
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar* in = x + p * g.in_h * g.in_w;
    Scalar* out = y + p * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Window w = window(g, oy, ox);
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (long iy = w.y0; iy < w.y1; ++iy)
          for (long ix = w.x0; ix < w.x1; ++ix) best = std::max(best, in[iy * g.in_w + ix]);
        out[oy * ow + ox] = best;
      }
  }
}

void max_pool_backward(const PoolGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dx) {
  check(g);
  const std::size_t oh = g.out_h(), ow = g.out_w(), planes = g.batch * g.channels;
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar* in = x + p * g.in_h * g.in_w;
    Scalar* grad = dx + p * g.in_h * g.in_w;
    std::fill(grad, grad + g.in_h * g.in_w, 0.0);
    const Scalar* upstream = dy + p * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Window w = window(g, oy, ox);
        long arg = -1;
        Scalar best = -std::numeric_limits<Scalar>::infinity();
        for (long iy = w.y0; iy < w.y1; ++iy)
          for (long ix = w.x0; ix < w.x1; ++ix) {
            const long idx = iy * static_cast<long>(g.in_w) + ix;
            if (arg < 0 || in[idx] > best) {
              best = in[idx];
              arg = idx;
            }
          }
        grad[arg] += upstream[oy * ow + ox];
      }
  }
}

void avg_pool_forward(const PoolGeometry& g, bool count_include_pad, const Scalar* x, Scalar* y) {
  check(g);
  const std::size_t oh = g.out_h(), ow = g.out_w(), planes = g.batch * g.channels;
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < planes; ++p) {
    const Scalar* in = x + p * g.in_h * g.in_w;
    Scalar* out = y + p * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Window w = window(g, oy, ox);
        Scalar sum = 0.0;
        for (long iy = w.y0; iy < w.y1; ++iy)
          for (long ix = w.x0; ix < w.x1; ++ix) sum += in[iy * g.in_w + ix];
        const auto count = count_include_pad ? w.padded_count : static_cast<std::size_t>((w.y1 - w.y0) * (w.x1 - w.x0));
        out[oy * ow + ox] = sum / static_cast<Scalar>(count);
      }
  }
}

void avg_pool_backward(const PoolGeometry& g, bool count_include_pad, const Scalar* dy, Scalar* dx) {
  check(g);
  const std::size_t oh = g.out_h(), ow = g.out_w(), planes = g.batch * g.channels;
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < planes; ++p) {
    Scalar* grad = dx + p * g.in_h * g.in_w;
    std::fill(grad, grad + g.in_h * g.in_w, 0.0);
    const Scalar* upstream = dy + p * oh * ow;
    for (std::size_t oy = 0; oy < oh; ++oy)
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const Window w = window(g, oy, ox);
        const auto count = count_include_pad ? w.padded_count : static_cast<std::size_t>((w.y1 - w.y0) * (w.x1 - w.x0));
        const Scalar share = upstream[oy * ow + ox] / static_cast<Scalar>(count);
        for (long iy = w.y0; iy < w.y1; ++iy)
          for (long ix = w.x0; ix < w.x1; ++ix) grad[iy * g.in_w + ix] += share;
      }
  }
}

}  // namespace numta::kernels
