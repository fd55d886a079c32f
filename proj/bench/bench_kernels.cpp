// Serial reference kernels against the OpenMP paths. Set OMP_NUM_THREADS to
// compare thread counts.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "numta/kernels/kernels.hpp"

using namespace numta;
namespace k = numta::kernels;

namespace {

std::vector<Scalar> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<Scalar> d;
  std::vector<Scalar> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

template <bool Ref>
void BM_gemm(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  auto a = random_vec(n * n, 1), b = random_vec(n * n, 2);
  std::vector<Scalar> c(n * n);
  for (auto _ : st) {
    if constexpr (Ref)
      k::reference::gemm(k::Trans::no, k::Trans::no, n, n, n, 1, a.data(), n, b.data(), n, 0, c.data(), n);
    else
      k::gemm(k::Trans::no, k::Trans::no, n, n, n, 1, a.data(), n, b.data(), n, 0, c.data(), n);
    benchmark::DoNotOptimize(c.data());
  }
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}

// 3x3 stride-1 same-padded conv over a batch of 8.
k::ConvGeometry conv_geometry(std::size_t channels, std::size_t hw) {
  k::ConvGeometry g;
  g.batch = 8;
  g.in_channels = g.out_channels = channels;
  g.in_h = g.in_w = hw;
  g.kernel_h = g.kernel_w = 3;
  g.pad_h = g.pad_w = 1;
  return g;
}

template <bool Ref>
void BM_conv_forward(benchmark::State& st) {
  const auto g = conv_geometry(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  auto x = random_vec(g.batch * g.in_channels * g.in_h * g.in_w, 3), w = random_vec(g.weight_size(), 4);
  std::vector<Scalar> y(g.batch * g.out_channels * g.out_h() * g.out_w());
  for (auto _ : st) {
    if constexpr (Ref) k::reference::conv2d_forward(g, x.data(), w.data(), nullptr, y.data());
    else k::conv2d_forward(g, x.data(), w.data(), nullptr, y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

template <bool Ref>
void BM_conv_backward(benchmark::State& st) {
  const auto g = conv_geometry(static_cast<std::size_t>(st.range(0)), static_cast<std::size_t>(st.range(1)));
  auto x = random_vec(g.batch * g.in_channels * g.in_h * g.in_w, 3), w = random_vec(g.weight_size(), 4);
  auto dy = random_vec(g.batch * g.out_channels * g.out_h() * g.out_w(), 5);
  std::vector<Scalar> dx(x.size()), dw(w.size());
  for (auto _ : st) {
    if constexpr (Ref) {
      k::reference::conv2d_backward_data(g, w.data(), dy.data(), dx.data());
      k::reference::conv2d_backward_weights(g, x.data(), dy.data(), dw.data(), nullptr);
    } else {
      k::conv2d_backward_data(g, w.data(), dy.data(), dx.data());
      k::conv2d_backward_weights(g, x.data(), dy.data(), dw.data(), nullptr);
    }
    benchmark::DoNotOptimize(dx.data());
    benchmark::DoNotOptimize(dw.data());
  }
}

}  // namespace

BENCHMARK(BM_gemm<true>)->Name("gemm/reference")->Arg(64)->Arg(256);
BENCHMARK(BM_gemm<false>)->Name("gemm/openmp")->Arg(64)->Arg(256);
BENCHMARK(BM_conv_forward<true>)->Name("conv_forward/reference")->Args({16, 32})->Args({64, 16});
BENCHMARK(BM_conv_forward<false>)->Name("conv_forward/openmp")->Args({16, 32})->Args({64, 16});
BENCHMARK(BM_conv_backward<true>)->Name("conv_backward/reference")->Args({16, 32})->Args({64, 16});
BENCHMARK(BM_conv_backward<false>)->Name("conv_backward/openmp")->Args({16, 32})->Args({64, 16});

BENCHMARK_MAIN();
