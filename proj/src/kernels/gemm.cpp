#include <algorithm>
#include <vector>

#include "numta/kernels/kernels.hpp"

namespace numta::kernels {
namespace {

constexpr std::size_t kMr = 4;
constexpr std::size_t kNr = 8;
constexpr std::size_t kKc = 256;
constexpr std::size_t kNc = 1024;

// A block packed as [row quad][k][kMr], zero padded past m.
void pack_a(Trans trans, const Scalar* a, std::size_t lda, std::size_t m, std::size_t k0, std::size_t kc,
            std::vector<Scalar>& out) {
  const std::size_t quads = (m + kMr - 1) / kMr;
  out.assign(quads * kc * kMr, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t q = 0; q < quads; ++q) {
    Scalar* dst = out.data() + q * kc * kMr;
    for (std::size_t r = 0; r < kMr; ++r) {
      const std::size_t i = q * kMr + r;
      if (i >= m) break;
      if (trans == Trans::no) {
        const Scalar* src = a + i * lda + k0;
        for (std::size_t p = 0; p < kc; ++p) dst[p * kMr + r] = src[p];
      } else {
        for (std::size_t p = 0; p < kc; ++p) dst[p * kMr + r] = a[(k0 + p) * lda + i];
      }
    }
  }
}

// B block packed as [column panel][k][kNr], zero padded past nc.
void pack_b(Trans trans, const Scalar* b, std::size_t ldb, std::size_t k0, std::size_t kc, std::size_t j0,
            std::size_t nc, std::vector<Scalar>& out) {
  const std::size_t panels = (nc + kNr - 1) / kNr;
  out.assign(panels * kc * kNr, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < panels; ++p) {
    Scalar* dst = out.data() + p * kc * kNr;
    const std::size_t cols = std::min(kNr, nc - p * kNr);
    const std::size_t jb = j0 + p * kNr;
    if (trans == Trans::no) {
      for (std::size_t q = 0; q < kc; ++q) {
        const Scalar* src = b + (k0 + q) * ldb + jb;
        for (std::size_t t = 0; t < cols; ++t) dst[q * kNr + t] = src[t];
      }
    } else {
      for (std::size_t t = 0; t < cols; ++t) {
        const Scalar* src = b + (jb + t) * ldb + k0;
        for (std::size_t q = 0; q < kc; ++q) dst[q * kNr + t] = src[q];
      }
    }
  }
}

inline void micro_kernel(std::size_t kc, const Scalar* __restrict ap, const Scalar* __restrict bp, Scalar alpha,
                         Scalar* c, std::size_t ldc, std::size_t rows, std::size_t cols) {
  Scalar acc[kMr][kNr] = {};
  for (std::size_t p = 0; p < kc; ++p) {
    const Scalar* a = ap + p * kMr;
    const Scalar* b = bp + p * kNr;
    for (std::size_t r = 0; r < kMr; ++r) {
#pragma omp simd
      for (std::size_t t = 0; t < kNr; ++t) acc[r][t] += a[r] * b[t];
    }
  }
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < cols; ++t) c[r * ldc + t] += alpha * acc[r][t];
}

}  // namespace

void gemm(Trans trans_a, Trans trans_b, std::size_t m, std::size_t n, std::size_t k, Scalar alpha,
          const Scalar* a, std::size_t lda, const Scalar* b, std::size_t ldb, Scalar beta, Scalar* c,
          std::size_t ldc) {
  if (m == 0 || n == 0) return;
  if (beta != 1.0) {
#pragma omp parallel for schedule(static) if (m * n > 16384)
    for (std::size_t i = 0; i < m; ++i) {
      Scalar* row = c + i * ldc;
      if (beta == 0.0)
        std::fill(row, row + n, 0.0);
      else
        for (std::size_t j = 0; j < n; ++j) row[j] *= beta;
    }
  }
  if (k == 0 || alpha == 0.0) return;

  std::vector<Scalar> apack, bpack;
  const std::size_t quads = (m + kMr - 1) / kMr;
  for (std::size_t jc = 0; jc < n; jc += kNc) {
    const std::size_t nc = std::min(kNc, n - jc);
    const std::size_t panels = (nc + kNr - 1) / kNr;
    for (std::size_t pc = 0; pc < k; pc += kKc) {
      const std::size_t kc = std::min(kKc, k - pc);
      pack_b(trans_b, b, ldb, pc, kc, jc, nc, bpack);
      pack_a(trans_a, a, lda, m, pc, kc, apack);
#pragma omp parallel for schedule(static) if (quads > 1)
      for (std::size_t q = 0; q < quads; ++q) {
        const std::size_t rows = std::min(kMr, m - q * kMr);
        for (std::size_t p = 0; p < panels; ++p) {
          const std::size_t cols = std::min(kNr, nc - p * kNr);
          micro_kernel(kc, apack.data() + q * kc * kMr, bpack.data() + p * kc * kNr, alpha,
                       c + q * kMr * ldc + jc + p * kNr, ldc, rows, cols);
        }
      }
    }
  }
}

}  // namespace numta::kernels
