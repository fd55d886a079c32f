#include <algorithm>
#include <cstring>
#include <vector>

#include "numta/core/errors.hpp"
#include "numta/kernels/kernels.hpp"

namespace numta::kernels {
namespace {

void check(const ConvGeometry& g) {
  if (!g.valid()) throw ShapeError("invalid convolution geometry");
}

bool is_pointwise(const ConvGeometry& g) {
  return g.kernel_h == 1 && g.kernel_w == 1 && g.stride_h == 1 && g.stride_w == 1 && g.pad_h == 0 && g.pad_w == 0;
}

bool is_depthwise(const ConvGeometry& g) { return g.in_per_group() == 1 && g.out_per_group() == 1; }

// Unfold the channels of one group of one image into a [cin_g*kh*kw, oh*ow] matrix.
void im2col(const ConvGeometry& g, const Scalar* x, Scalar* col) {
  const std::size_t cin = g.in_per_group(), oh = g.out_h(), ow = g.out_w();
  const std::size_t rows = cin * g.kernel_h * g.kernel_w;
#pragma omp parallel for schedule(static) if (rows * oh * ow > 32768)
  for (std::size_t row = 0; row < rows; ++row) {
    const std::size_t c = row / (g.kernel_h * g.kernel_w);
    const std::size_t ki = (row / g.kernel_w) % g.kernel_h;
    const std::size_t kj = row % g.kernel_w;
    const Scalar* plane = x + c * g.in_h * g.in_w;
    Scalar* dst = col + row * oh * ow;
    for (std::size_t y = 0; y < oh; ++y) {
      const long iy = static_cast<long>(y * g.stride_h + ki) - static_cast<long>(g.pad_h);
      Scalar* out = dst + y * ow;
      if (iy < 0 || iy >= static_cast<long>(g.in_h)) {
        std::fill(out, out + ow, 0.0);
        continue;
      }
      const Scalar* src = plane + iy * g.in_w;
      for (std::size_t xo = 0; xo < ow; ++xo) {
        const long ix = static_cast<long>(xo * g.stride_w + kj) - static_cast<long>(g.pad_w);
        out[xo] = (ix < 0 || ix >= static_cast<long>(g.in_w)) ? 0.0 : src[ix];
      }
    }
  }
}

// Fold a column matrix back, accumulating into dx. Parallel over input channels so writes never collide.
void col2im(const ConvGeometry& g, const Scalar* col, Scalar* dx) {
  const std::size_t cin = g.in_per_group(), oh = g.out_h(), ow = g.out_w();
  const std::size_t kk = g.kernel_h * g.kernel_w;
#pragma omp parallel for schedule(static) if (cin * kk * oh * ow > 32768)
  for (std::size_t c = 0; c < cin; ++c) {
    Scalar* plane = dx + c * g.in_h * g.in_w;
    for (std::size_t k = 0; k < kk; ++k) {
      const std::size_t ki = k / g.kernel_w, kj = k % g.kernel_w;
      const Scalar* src = col + (c * kk + k) * oh * ow;
      for (std::size_t y = 0; y < oh; ++y) {
        const long iy = static_cast<long>(y * g.stride_h + ki) - static_cast<long>(g.pad_h);
        if (iy < 0 || iy >= static_cast<long>(g.in_h)) continue;
        Scalar* dst = plane + iy * g.in_w;
        for (std::size_t xo = 0; xo < ow; ++xo) {
          const long ix = static_cast<long>(xo * g.stride_w + kj) - static_cast<long>(g.pad_w);
          if (ix >= 0 && ix < static_cast<long>(g.in_w)) dst[ix] += src[y * ow + xo];
        }
      }
    }
  }
}

void depthwise_forward(const ConvGeometry& g, const Scalar* x, const Scalar* w, const Scalar* bias, Scalar* y) {
  const std::size_t c_count = g.in_channels, oh = g.out_h(), ow = g.out_w();
  const long ih = static_cast<long>(g.in_h), iw = static_cast<long>(g.in_w);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t c = 0; c < c_count; ++c) {
      const Scalar* plane = x + (n * c_count + c) * g.in_h * g.in_w;
      const Scalar* kernel = w + c * g.kernel_h * g.kernel_w;
      Scalar* out = y + (n * c_count + c) * oh * ow;
      const Scalar b = bias ? bias[c] : 0.0;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          Scalar acc = b;
          const long y0 = static_cast<long>(oy * g.stride_h) - static_cast<long>(g.pad_h);
          const long x0 = static_cast<long>(ox * g.stride_w) - static_cast<long>(g.pad_w);
          for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
            const long iy = y0 + static_cast<long>(ki);
            if (iy < 0 || iy >= ih) continue;
            for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
              const long ix = x0 + static_cast<long>(kj);
              if (ix < 0 || ix >= iw) continue;
              acc += kernel[ki * g.kernel_w + kj] * plane[iy * iw + ix];
            }
          }
          out[oy * ow + ox] = acc;
        }
      }
    }
  }
}

void depthwise_backward_data(const ConvGeometry& g, const Scalar* w, const Scalar* dy, Scalar* dx) {
  const std::size_t c_count = g.in_channels, oh = g.out_h(), ow = g.out_w();
  const long ih = static_cast<long>(g.in_h), iw = static_cast<long>(g.in_w);
#pragma omp parallel for collapse(2) schedule(static)
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t c = 0; c < c_count; ++c) {
      Scalar* plane = dx + (n * c_count + c) * g.in_h * g.in_w;
      std::fill(plane, plane + g.in_h * g.in_w, 0.0);
      const Scalar* kernel = w + c * g.kernel_h * g.kernel_w;
      const Scalar* grad = dy + (n * c_count + c) * oh * ow;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const Scalar gv = grad[oy * ow + ox];
          const long y0 = static_cast<long>(oy * g.stride_h) - static_cast<long>(g.pad_h);
          const long x0 = static_cast<long>(ox * g.stride_w) - static_cast<long>(g.pad_w);
          for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
            const long iy = y0 + static_cast<long>(ki);
            if (iy < 0 || iy >= ih) continue;
            for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
              const long ix = x0 + static_cast<long>(kj);
              if (ix < 0 || ix >= iw) continue;
              plane[iy * iw + ix] += kernel[ki * g.kernel_w + kj] * gv;
            }
          }
        }
      }
    }
  }
}

void depthwise_backward_weights(const ConvGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dw,
                                Scalar* dbias) {
  const std::size_t c_count = g.in_channels, oh = g.out_h(), ow = g.out_w();
  const std::size_t kk = g.kernel_h * g.kernel_w;
  const long ih = static_cast<long>(g.in_h), iw = static_cast<long>(g.in_w);
#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < c_count; ++c) {
    Scalar* kernel_grad = dw + c * kk;
    std::fill(kernel_grad, kernel_grad + kk, 0.0);
    Scalar bias_grad = 0.0;
    for (std::size_t n = 0; n < g.batch; ++n) {
      const Scalar* plane = x + (n * c_count + c) * g.in_h * g.in_w;
      const Scalar* grad = dy + (n * c_count + c) * oh * ow;
      for (std::size_t oy = 0; oy < oh; ++oy) {
        for (std::size_t ox = 0; ox < ow; ++ox) {
          const Scalar gv = grad[oy * ow + ox];
          bias_grad += gv;
          const long y0 = static_cast<long>(oy * g.stride_h) - static_cast<long>(g.pad_h);
          const long x0 = static_cast<long>(ox * g.stride_w) - static_cast<long>(g.pad_w);
          for (std::size_t ki = 0; ki < g.kernel_h; ++ki) {
            const long iy = y0 + static_cast<long>(ki);
            if (iy < 0 || iy >= ih) continue;
            for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
              const long ix = x0 + static_cast<long>(kj);
              if (ix < 0 || ix >= iw) continue;
              kernel_grad[ki * g.kernel_w + kj] += gv * plane[iy * iw + ix];
            }
          }
        }
      }
    }
    if (dbias) dbias[c] = bias_grad;
  }
}

}  // namespace

bool ConvGeometry::valid() const {
  return batch > 0 && groups > 0 && in_channels % groups == 0 && out_channels % groups == 0 && in_channels > 0 &&
         out_channels > 0 && kernel_h > 0 && kernel_w > 0 && stride_h > 0 && stride_w > 0 &&
         in_h + 2 * pad_h >= kernel_h && in_w + 2 * pad_w >= kernel_w;
}

void conv2d_forward(const ConvGeometry& g, const Scalar* x, const Scalar* w, const Scalar* bias, Scalar* y) {
  check(g);
  if (is_depthwise(g)) return depthwise_forward(g, x, w, bias, y);

  const std::size_t cin = g.in_per_group(), cout = g.out_per_group();
  const std::size_t spatial = g.out_h() * g.out_w(), depth = cin * g.kernel_h * g.kernel_w;
  const bool pointwise = is_pointwise(g);
  std::vector<Scalar> col(pointwise ? 0 : depth * spatial);
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      const Scalar* xg = x + (n * g.in_channels + grp * cin) * g.in_h * g.in_w;
      Scalar* yg = y + (n * g.out_channels + grp * cout) * spatial;
      const Scalar* src = xg;
      if (!pointwise) {
        im2col(g, xg, col.data());
        src = col.data();
      }
      gemm(Trans::no, Trans::no, cout, spatial, depth, 1.0, w + grp * cout * depth, depth, src, spatial, 0.0, yg,
           spatial);
      if (bias) {
        for (std::size_t c = 0; c < cout; ++c) {
          const Scalar b = bias[grp * cout + c];
          Scalar* row = yg + c * spatial;
          for (std::size_t i = 0; i < spatial; ++i) row[i] += b;
        }
      }
    }
  }
}

void conv2d_backward_data(const ConvGeometry& g, const Scalar* w, const Scalar* dy, Scalar* dx) {
  check(g);
  if (is_depthwise(g)) return depthwise_backward_data(g, w, dy, dx);

  const std::size_t cin = g.in_per_group(), cout = g.out_per_group();
  const std::size_t spatial = g.out_h() * g.out_w(), depth = cin * g.kernel_h * g.kernel_w;
  const bool pointwise = is_pointwise(g);
  std::vector<Scalar> col(pointwise ? 0 : depth * spatial);
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      Scalar* dxg = dx + (n * g.in_channels + grp * cin) * g.in_h * g.in_w;
      const Scalar* dyg = dy + (n * g.out_channels + grp * cout) * spatial;
      const Scalar* wg = w + grp * cout * depth;
      if (pointwise) {
        gemm(Trans::yes, Trans::no, depth, spatial, cout, 1.0, wg, depth, dyg, spatial, 0.0, dxg, spatial);
      } else {
        gemm(Trans::yes, Trans::no, depth, spatial, cout, 1.0, wg, depth, dyg, spatial, 0.0, col.data(), spatial);
        std::fill(dxg, dxg + cin * g.in_h * g.in_w, 0.0);
        col2im(g, col.data(), dxg);
      }
    }
  }
}

void conv2d_backward_weights(const ConvGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dw, Scalar* dbias) {
  check(g);
  if (is_depthwise(g)) return depthwise_backward_weights(g, x, dy, dw, dbias);

  const std::size_t cin = g.in_per_group(), cout = g.out_per_group();
  const std::size_t spatial = g.out_h() * g.out_w(), depth = cin * g.kernel_h * g.kernel_w;
  const bool pointwise = is_pointwise(g);
  std::vector<Scalar> col(pointwise ? 0 : depth * spatial);
  std::fill(dw, dw + g.weight_size(), 0.0);
  if (dbias) std::fill(dbias, dbias + g.out_channels, 0.0);
  for (std::size_t n = 0; n < g.batch; ++n) {
    for (std::size_t grp = 0; grp < g.groups; ++grp) {
      const Scalar* xg = x + (n * g.in_channels + grp * cin) * g.in_h * g.in_w;
      const Scalar* dyg = dy + (n * g.out_channels + grp * cout) * spatial;
      const Scalar* src = xg;
      if (!pointwise) {
        im2col(g, xg, col.data());
        src = col.data();
      }
      gemm(Trans::no, Trans::yes, cout, depth, spatial, 1.0, dyg, spatial, src, spatial, 1.0, dw + grp * cout * depth,
           depth);
      if (dbias) {
        for (std::size_t c = 0; c < cout; ++c) {
          const Scalar* row = dyg + c * spatial;
          Scalar s = 0.0;
          for (std::size_t i = 0; i < spatial; ++i) s += row[i];
          dbias[grp * cout + c] += s;
        }
      }
    }
  }
}

}  // namespace numta::kernels
