#pragma once

// Compute kernels behind the layers. The functions in numta::kernels are the
// OpenMP-parallel production paths; numta::kernels::reference holds plain
// serial loops with identical signatures, kept for testing and benchmarking.

#include <cstddef>

#include "numta/core/tensor.hpp"

namespace numta::kernels {

enum class Trans { no, yes };

/// C = alpha * op(A) * op(B) + beta * C, all row-major. op(A) is M x K, op(B) is K x N.
void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, Scalar alpha,
          const Scalar* a, std::size_t lda, const Scalar* b, std::size_t ldb, Scalar beta, Scalar* c,
          std::size_t ldc);

struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t in_channels = 1, in_h = 1, in_w = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 1, kernel_w = 1;
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;
  std::size_t groups = 1;

  std::size_t out_h() const { return (in_h + 2 * pad_h - kernel_h) / stride_h + 1; }
  std::size_t out_w() const { return (in_w + 2 * pad_w - kernel_w) / stride_w + 1; }
  std::size_t in_per_group() const { return in_channels / groups; }
  std::size_t out_per_group() const { return out_channels / groups; }
  /// Weight layout is [out_channels, in_per_group, kernel_h, kernel_w].
  std::size_t weight_size() const { return out_channels * in_per_group() * kernel_h * kernel_w; }
  bool valid() const;
};

/// y = conv(x, w) + bias. bias may be null.
void conv2d_forward(const ConvGeometry& g, const Scalar* x, const Scalar* w, const Scalar* bias, Scalar* y);
/// dx = conv^T(dy, w); dx is overwritten.
void conv2d_backward_data(const ConvGeometry& g, const Scalar* w, const Scalar* dy, Scalar* dx);
/// dw (and dbias if non-null) are overwritten with the gradient summed over the batch.
void conv2d_backward_weights(const ConvGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dw, Scalar* dbias);

struct PoolGeometry {
  std::size_t batch = 1, channels = 1, in_h = 1, in_w = 1;
  std::size_t kernel_h = 1, kernel_w = 1;
  std::size_t stride_h = 1, stride_w = 1;
  std::size_t pad_h = 0, pad_w = 0;

  std::size_t out_h() const { return (in_h + 2 * pad_h - kernel_h) / stride_h + 1; }
  std::size_t out_w() const { return (in_w + 2 * pad_w - kernel_w) / stride_w + 1; }
  bool valid() const;
};

// Padding never wins a max; ties go to the first element in scan order.
void max_pool_forward(const PoolGeometry& g, const Scalar* x, Scalar* y);
void max_pool_backward(const PoolGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dx);
void avg_pool_forward(const PoolGeometry& g, bool count_include_pad, const Scalar* x, Scalar* y);
void avg_pool_backward(const PoolGeometry& g, bool count_include_pad, const Scalar* dy, Scalar* dx);

namespace reference {

void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, Scalar alpha,
          const Scalar* a, std::size_t lda, const Scalar* b, std::size_t ldb, Scalar beta, Scalar* c,
          std::size_t ldc);
void conv2d_forward(const ConvGeometry& g, const Scalar* x, const Scalar* w, const Scalar* bias, Scalar* y);
void conv2d_backward_data(const ConvGeometry& g, const Scalar* w, const Scalar* dy, Scalar* dx);
void conv2d_backward_weights(const ConvGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dw, Scalar* dbias);
void max_pool_forward(const PoolGeometry& g, const Scalar* x, Scalar* y);
void max_pool_backward(const PoolGeometry& g, const Scalar* x, const Scalar* dy, Scalar* dx);
void avg_pool_forward(const PoolGeometry& g, bool count_include_pad, const Scalar* x, Scalar* y);
void avg_pool_backward(const PoolGeometry& g, bool count_include_pad, const Scalar* dy, Scalar* dx);

}  // namespace reference
}  // namespace numta::kernels
