#include <doctest.h>

#include <vector>

#include "numta/kernels/kernels.hpp"
#include "support.hpp"

using namespace numta;
using namespace numta::kernels;
using numta::test::max_abs_diff;
using numta::test::random_tensor;

namespace {

void check_gemm(Trans ta, Trans tb, std::size_t m, std::size_t n, std::size_t k, double alpha, double beta) {
  const std::size_t lda = (ta == Trans::no ? k : m) + 3, ldb = (tb == Trans::no ? n : k) + 1, ldc = n + 2;
  const auto a = random_tensor({(ta == Trans::no ? m : k) * lda}, 1);
  const auto b = random_tensor({(tb == Trans::no ? k : n) * ldb}, 2);
  auto c1 = random_tensor({m * ldc}, 3);
  auto c2 = c1;
  gemm(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb, beta, c1.data(), ldc);
  reference::gemm(ta, tb, m, n, k, alpha, a.data(), lda, b.data(), ldb, beta, c2.data(), ldc);
  CHECK(max_abs_diff(c1.values(), c2.values()) < 1e-10 * static_cast<double>(k + 1));
}

}  // namespace

TEST_CASE("gemm matches the reference for every transpose combination and awkward sizes") {
  for (auto ta : {Trans::no, Trans::yes})
    for (auto tb : {Trans::no, Trans::yes})
      for (auto [m, n, k] : {std::tuple{1, 1, 1}, {3, 5, 7}, {17, 9, 300}, {64, 130, 33}, {5, 1100, 20}}) {
        CAPTURE(m);
        CAPTURE(n);
        CAPTURE(k);
        check_gemm(ta, tb, m, n, k, 1.0, 0.0);
        check_gemm(ta, tb, m, n, k, -0.5, 1.0);
      }
}

TEST_CASE("gemm with beta 0 ignores NaN garbage in C") {
  const auto a = random_tensor({4 * 3}, 1), b = random_tensor({3 * 5}, 2);
  std::vector<double> c(4 * 5, std::nan("")), r(4 * 5, 0.0);
  gemm(Trans::no, Trans::no, 4, 5, 3, 1.0, a.data(), 3, b.data(), 5, 0.0, c.data(), 5);
  reference::gemm(Trans::no, Trans::no, 4, 5, 3, 1.0, a.data(), 3, b.data(), 5, 0.0, r.data(), 5);
  CHECK(max_abs_diff(c, r) < 1e-12);
}

TEST_CASE("gemm against a hand-computed product") {
  const double a[] = {1, 2, 3, 4, 5, 6};        // 2x3
  const double b[] = {7, 8, 9, 10, 11, 12};     // 3x2
  double c[4] = {};
  gemm(Trans::no, Trans::no, 2, 2, 3, 1.0, a, 3, b, 2, 0.0, c, 2);
  CHECK(c[0] == 58);
  CHECK(c[1] == 64);
  CHECK(c[2] == 139);
  CHECK(c[3] == 154);
}

namespace {

void check_conv(const ConvGeometry& g, bool bias) {
  REQUIRE(g.valid());
  const std::size_t xs = g.batch * g.in_channels * g.in_h * g.in_w;
  const std::size_t ys = g.batch * g.out_channels * g.out_h() * g.out_w();
  const auto x = random_tensor({xs}, 11), w = random_tensor({g.weight_size()}, 12), b = random_tensor({g.out_channels}, 13);
  const auto dy = random_tensor({ys}, 14);
  std::vector<double> y1(ys), y2(ys), dx1(xs, 7.0), dx2(xs, -7.0), dw1(g.weight_size(), 3.0),
      dw2(g.weight_size()), db1(g.out_channels, 9.0), db2(g.out_channels);
  const double* bp = bias ? b.data() : nullptr;
  conv2d_forward(g, x.data(), w.data(), bp, y1.data());
  reference::conv2d_forward(g, x.data(), w.data(), bp, y2.data());
  CHECK(max_abs_diff(y1, y2) < 1e-10);
  conv2d_backward_data(g, w.data(), dy.data(), dx1.data());
  reference::conv2d_backward_data(g, w.data(), dy.data(), dx2.data());
  CHECK(max_abs_diff(dx1, dx2) < 1e-10);
  conv2d_backward_weights(g, x.data(), dy.data(), dw1.data(), bias ? db1.data() : nullptr);
  reference::conv2d_backward_weights(g, x.data(), dy.data(), dw2.data(), bias ? db2.data() : nullptr);
  CHECK(max_abs_diff(dw1, dw2) < 1e-9);
  if (bias) CHECK(max_abs_diff(db1, db2) < 1e-9);
}

}  // namespace

TEST_CASE("convolution matches the reference") {
  SUBCASE("3x3 stride 1 pad 1 with bias") { check_conv({2, 3, 9, 7, 5, 3, 3, 1, 1, 1, 1, 1}, true); }
  SUBCASE("7x7 stride 2 pad 3") { check_conv({2, 3, 16, 16, 8, 7, 7, 2, 2, 3, 3, 1}, false); }
  SUBCASE("pointwise") { check_conv({3, 16, 5, 6, 12, 1, 1, 1, 1, 0, 0, 1}, true); }
  SUBCASE("pointwise strided") { check_conv({2, 8, 9, 9, 4, 1, 1, 2, 2, 0, 0, 1}, false); }
  SUBCASE("asymmetric 1x7 and 7x1") {
    check_conv({2, 4, 10, 10, 6, 1, 7, 1, 1, 0, 3, 1}, false);
    check_conv({2, 4, 10, 10, 6, 7, 1, 1, 1, 3, 0, 1}, false);
  }
  SUBCASE("grouped") { check_conv({2, 8, 7, 7, 12, 3, 3, 1, 1, 1, 1, 4}, true); }
  SUBCASE("depthwise 3x3 and 5x5 strided") {
    check_conv({2, 6, 11, 11, 6, 3, 3, 1, 1, 1, 1, 6}, false);
    check_conv({2, 6, 11, 11, 6, 5, 5, 2, 2, 2, 2, 6}, true);
  }
  SUBCASE("window larger than the unpadded input") { check_conv({1, 2, 2, 2, 3, 3, 3, 1, 1, 1, 1, 1}, true); }
}

TEST_CASE("convolution against a hand-computed 2x2 kernel") {
  ConvGeometry g{1, 1, 3, 3, 1, 2, 2, 1, 1, 0, 0, 1};
  const double x[] = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  const double w[] = {1, 0, 0, -1};
  double y[4];
  conv2d_forward(g, x, w, nullptr, y);
  for (double v : y) CHECK(v == -4.0);
}

namespace {

void check_pool(const PoolGeometry& g) {
  REQUIRE(g.valid());
  const std::size_t xs = g.batch * g.channels * g.in_h * g.in_w, ys = g.batch * g.channels * g.out_h() * g.out_w();
  const auto x = random_tensor({xs}, 21), dy = random_tensor({ys}, 22);
  std::vector<double> y1(ys), y2(ys), dx1(xs, 5.0), dx2(xs, -5.0);
  max_pool_forward(g, x.data(), y1.data());
  reference::max_pool_forward(g, x.data(), y2.data());
  CHECK(max_abs_diff(y1, y2) == 0.0);
  max_pool_backward(g, x.data(), dy.data(), dx1.data());
  reference::max_pool_backward(g, x.data(), dy.data(), dx2.data());
  CHECK(max_abs_diff(dx1, dx2) < 1e-12);
  for (bool include : {true, false}) {
    avg_pool_forward(g, include, x.data(), y1.data());
    reference::avg_pool_forward(g, include, x.data(), y2.data());
    CHECK(max_abs_diff(y1, y2) < 1e-12);
    avg_pool_backward(g, include, dy.data(), dx1.data());
    reference::avg_pool_backward(g, include, dy.data(), dx2.data());
    CHECK(max_abs_diff(dx1, dx2) < 1e-12);
  }
}

}  // namespace

TEST_CASE("pooling matches the reference") {
  check_pool({2, 3, 9, 9, 3, 3, 2, 2, 1, 1});
  check_pool({2, 3, 8, 7, 3, 3, 1, 1, 1, 1});
  check_pool({1, 4, 6, 6, 2, 2, 2, 2, 0, 0});
  check_pool({1, 2, 5, 5, 5, 5, 1, 1, 0, 0});
}

TEST_CASE("average pooling border counts") {
  // 3x3 window, stride 1, pad 1 on a 2x2 map of ones: every window sees 4 real cells.
  PoolGeometry g{1, 1, 2, 2, 3, 3, 1, 1, 1, 1};
  const double x[] = {1, 1, 1, 1};
  double y[4];
  avg_pool_forward(g, true, x, y);
  for (double v : y) CHECK(v == doctest::Approx(4.0 / 9.0));
  avg_pool_forward(g, false, x, y);
  for (double v : y) CHECK(v == 1.0);
}

TEST_CASE("max pooling ignores padding and keeps the first of equal maxima") {
  PoolGeometry g{1, 1, 2, 2, 2, 2, 2, 2, 0, 0};
  const double x[] = {-3, -3, -3, -3};
  double y[1];
  max_pool_forward(g, x, y);
  CHECK(y[0] == -3.0);
  const double dy[] = {1.0};
  double dx[4];
  max_pool_backward(g, x, dy, dx);
  CHECK(dx[0] == 1.0);
  CHECK(dx[1] == 0.0);
  CHECK(dx[2] == 0.0);
  CHECK(dx[3] == 0.0);

  PoolGeometry padded{1, 1, 1, 1, 3, 3, 1, 1, 1, 1};
  const double neg[] = {-5.0};
  max_pool_forward(padded, neg, y);
  CHECK(y[0] == -5.0);
}
