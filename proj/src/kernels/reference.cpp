// Straightforward serial loops. No blocking, no packing, no threads.

#include <algorithm>
#include <limits>
#include <vector>

#include "numta/core/errors.hpp"
#include "numta/kernels/kernels.hpp"

namespace numta::kernels::reference {

void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, Scalar alpha,
          const Scalar* a, std::size_t lda, const Scalar* b, std::size_t ldb, Scalar beta, Scalar* c,
          std::size_t ldc) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Scalar sum = 0.0;
      for (std::size_t p = 0; p < k; ++p) {
        const Scalar av = trans_a == Trans::no ? a[i * lda + p] : a[p * lda + i];
        const Scalar bv = trans_b == Trans::no ? b[p * ldb + j] : b[j * ldb + p];
        sum += av * bv;
      }
      c[i * ldc + j] = alpha * sum + (beta == 0.0 ? 0.0 : beta * c[i * ldc + j]);
    }
}

namespace {

// Calls fn(n, oc, oy, ox, ic, ki, kj, input_index) for every in-bounds tap.
template <typename Fn>
void for_each_tap(const ConvGeometry& g, Fn&& fn) {
  const std::size_t cin = g.in_per_group(), cout = g.out_per_group();
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
      const std::size_t grp = oc / cout;
      for (std::size_t oy = 0; oy < g.out_h(); ++oy)
        for (std::size_t ox = 0; ox < g.out_w(); ++ox)
          for (std::size_t ic = 0; ic < cin; ++ic)
            for (std::size_t ki = 0; ki < g.kernel_h; ++ki)
              for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
                const long iy = static_cast<long>(oy * g.stride_h + ki) - static_cast<long>(g.pad_h);
                const long ix = static_cast<long>(ox * g.stride_w + kj) - static_cast<long>(g.pad_w);
                if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.in_h) || ix >= static_cast<long>(g.in_w)) continue;
                const std::size_t in_c = grp * cin + ic;
                const std::size_t xi = ((n * g.in_channels + in_c) * g.in_h + iy) * g.in_w + ix;
                const std::size_t wi = ((oc * cin + ic) * g.kernel_h + ki) * g.kernel_w + kj;
                const std::size_t yi = ((n * g.out_channels + oc) * g.out_h() + oy) * g.out_w() + ox;
                fn(xi, wi, yi);
              }
    }
}

}  // namespace

void conv2d_forward(const ConvGeometry& g, const Scalar* x, const Scalar* w, const Scalar* bias, Scalar* y) {
  if (!g.valid()) throw ShapeError("invalid convolution geometry");
  const std::size_t spatial = g.out_h() * g.out_w();
  for (std::size_t n = 0; n < g.batch; ++n)
    for (std::size_t oc = 0; oc < g.out_channels; ++oc)
      for (std::size_t i = 0; i < spatial; ++i) y[(n * g.out_channels + oc) * spatial + i] = bias ? bias[oc] : 0.0;
  for_each_tap(g, [&](std::size_t xi, std::size_t wi, std::size_t yi) { y[yi] += w[wi] * x[xi]; });
}

void conv2d_backward_data(const ConvGeometry& g, const Scalar* w, const Scalar* dy, Scalar* dx) {
  if (!g.valid()) throw ShapeError("invalid convolution geometry");
  std::fill(dx, dx + g.batch * g.in_channels * g.in_h * g.in_w, 0.0);
  for_each_tap(g, [&](std::size_t xi, std::size_t wi, std::size_t yi) { dx[xi] += w[wi] * dy[yi]; });
}

void conv2d_backward_weights(const ConvGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dw, Scalar* dbias) {
  if (!g.valid()) throw ShapeError("invalid convolution geometry");
  std::fill(dw, dw + g.weight_size(), 0.0);
  for_each_tap(g, [&](std::size_t xi, std::size_t wi, std::size_t yi) { dw[wi] += x[xi] * dy[yi]; });
  if (dbias) {
    const std::size_t spatial = g.out_h() * g.out_w();
    for (std::size_t oc = 0; oc < g.out_channels; ++oc) {
      Scalar s = 0.0;
      for (std::size_t n = 0; n < g.batch; ++n)
        for (std::size_t i = 0; i < spatial; ++i) s += dy[(n * g.out_channels + oc) * spatial + i];
      dbias[oc] = s;
    }
  }
}

namespace {

template <typename Fn>
void for_each_window(const PoolGeometry& g, Fn&& fn) {
  for (std::size_t p = 0; p < g.batch * g.channels; ++p)
    for (std::size_t oy = 0; oy < g.out_h(); ++oy)
      for (std::size_t ox = 0; ox < g.out_w(); ++ox) {
        std::vector<std::size_t> taps;
        std::size_t padded = 0;
        for (std::size_t ki = 0; ki < g.kernel_h; ++ki)
          for (std::size_t kj = 0; kj < g.kernel_w; ++kj) {
            const long iy = static_cast<long>(oy * g.stride_h + ki) - static_cast<long>(g.pad_h);
            const long ix = static_cast<long>(ox * g.stride_w + kj) - static_cast<long>(g.pad_w);
            if (iy < static_cast<long>(g.in_h + g.pad_h) && ix < static_cast<long>(g.in_w + g.pad_w)) ++padded;
            if (iy < 0 || ix < 0 || iy >= static_cast<long>(g.in_h) || ix >= static_cast<long>(g.in_w)) continue;
            taps.push_back(p * g.in_h * g.in_w + static_cast<std::size_t>(iy) * g.in_w + static_cast<std::size_t>(ix));
          }
        fn(taps, padded, (p * g.out_h() + oy) * g.out_w() + ox);
      }
}

}  // namespace

void max_pool_forward(const PoolGeometry& g, const Scalar* x, Scalar* y) {
  if (!g.valid()) throw ShapeError("invalid pooling geometry");
  for_each_window(g, [&](const std::vector<std::size_t>& taps, std::size_t, std::size_t yi) {
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (auto t : taps) best = std::max(best, x[t]);
    y[yi] = best;
  });
}

void max_pool_backward(const PoolGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dx) {
  if (!g.valid()) throw ShapeError("invalid pooling geometry");
  std::fill(dx, dx + g.batch * g.channels * g.in_h * g.in_w, 0.0);
  for_each_window(g, [&](const std::vector<std::size_t>& taps, std::size_t, std::size_t yi) {
    std::size_t arg = taps.front();
    for (auto t : taps)
      if (x[t] > x[arg]) arg = t;
    dx[arg] += dy[yi];
  });
}

void avg_pool_forward(const PoolGeometry& g, bool count_include_pad, const Scalar* x, Scalar* y) {
  if (!g.valid()) throw ShapeError("invalid pooling geometry");
  for_each_window(g, [&](const std::vector<std::size_t>& taps, std::size_t padded, std::size_t yi) {
    Scalar sum = 0.0;
    for (auto t : taps) sum += x[t];
    y[yi] = sum / static_cast<Scalar>(count_include_pad ? padded : taps.size());
  });
}

void avg_pool_backward(const PoolGeometry& g, bool count_include_pad, const Scalar* dy, Scalar* dx) {
  if (!g.valid()) throw ShapeError("invalid pooling geometry");
  std::fill(dx, dx + g.batch * g.channels * g.in_h * g.in_w, 0.0);
  for_each_window(g, [&](const std::vector<std::size_t>& taps, std::size_t padded, std::size_t yi) {
    const Scalar share = dy[yi] / static_cast<Scalar>(count_include_pad ? padded : taps.size());
    for (auto t : taps) dx[t] += share;
  });
}

}  // namespace numta::kernels::reference
