#include <doctest.h>

#include <cmath>
#include <vector>

#include "lasco/kernels/dispatch.hpp"
#include "lasco/kernels/kernels.hpp"
#include "lasco/kernels/thread_pool.hpp"
#include "lasco/nn/rng.hpp"

using namespace lasco;
namespace k = lasco::kernels;

namespace {

std::vector<float> random_vec(size_t n, uint64_t seed, double scale = 1.0) {
  nn::Rng rng(seed);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(rng.normal(0.0, scale));
  return v;
}

// double-precision reference for the float kernels
std::vector<double> gemm_ref_f64(int64_t m, int64_t kk, int64_t n,
                                 const std::vector<float>& a,
                                 const std::vector<float>& b) {
  std::vector<double> c(static_cast<size_t>(m * n), 0.0);
  for (int64_t i = 0; i < m; ++i)
    for (int64_t l = 0; l < kk; ++l)
      for (int64_t j = 0; j < n; ++j)
        c[static_cast<size_t>(i * n + j)] +=
            static_cast<double>(a[static_cast<size_t>(i * kk + l)]) *
            static_cast<double>(b[static_cast<size_t>(l * n + j)]);
  return c;
}

}  // namespace

TEST_CASE("gemm lanes agree with the double-precision reference") {
  const struct {
    int64_t m, k, n;
  } shapes[] = {{1, 1, 1},   {3, 5, 7},    {4, 32, 32},  {17, 13, 33},
                {64, 128, 96}, {31, 7, 129}, {128, 64, 40}, {2, 512, 8}};
  for (const auto& s : shapes) {
    for (bool acc : {false, true}) {
      CAPTURE(s.m);
      CAPTURE(s.k);
      CAPTURE(s.n);
      CAPTURE(acc);
      const auto a = random_vec(static_cast<size_t>(s.m * s.k), 11 * s.m + s.n);
      const auto b = random_vec(static_cast<size_t>(s.k * s.n), 7 * s.k + s.n);
      auto c0 = random_vec(static_cast<size_t>(s.m * s.n), 3);
      auto ref = gemm_ref_f64(s.m, s.k, s.n, a, b);
      if (acc)
        for (size_t i = 0; i < ref.size(); ++i) ref[i] += c0[i];

      auto c_scalar = c0;
      k::gemm_f32_scalar(s.m, s.k, s.n, a.data(), b.data(), c_scalar.data(), acc);
      auto c_avx = c0;
      k::gemm_f32_avx2(s.m, s.k, s.n, a.data(), b.data(), c_avx.data(), acc);

      for (size_t i = 0; i < ref.size(); ++i) {
        const double tol = 1e-4 * (std::abs(ref[i]) + 1.0);
        CHECK(std::abs(c_scalar[i] - ref[i]) < tol);
        CHECK(std::abs(c_avx[i] - ref[i]) < tol);
      }
    }
  }
}

TEST_CASE("gemm is invariant to the worker thread count") {
  const int64_t m = 61, kk = 37, n = 53;
  const auto a = random_vec(static_cast<size_t>(m * kk), 1);
  const auto b = random_vec(static_cast<size_t>(kk * n), 2);
  std::vector<float> c1(static_cast<size_t>(m * n)), c4 = c1;

  const int saved = k::thread_count();
  k::set_thread_count(1);
  k::gemm(m, kk, n, a.data(), b.data(), c1.data(), false);
  k::set_thread_count(4);
  k::gemm(m, kk, n, a.data(), b.data(), c4.data(), false);
  k::set_thread_count(saved);
  CHECK(c1 == c4);
}

TEST_CASE("elementwise lanes agree") {
  const size_t n = 1003;
  const auto x = random_vec(n, 5, 2.0);
  const auto dy = random_vec(n, 6);

  std::vector<float> ys(n), ya(n);
  k::gelu_f32_scalar(n, x.data(), ys.data());
  k::gelu_f32_avx2(n, x.data(), ya.data());
  for (size_t i = 0; i < n; ++i)
    CHECK(std::abs(ys[i] - ya[i]) < 2e-6 * (std::abs(ys[i]) + 1.0));

  std::vector<float> gs(n), ga(n);
  k::gelu_grad_f32_scalar(n, x.data(), dy.data(), gs.data());
  k::gelu_grad_f32_avx2(n, x.data(), dy.data(), ga.data());
  for (size_t i = 0; i < n; ++i)
    CHECK(std::abs(gs[i] - ga[i]) < 4e-6 * (std::abs(gs[i]) + 1.0));

  std::vector<float> as(n), aa(n);
  k::add_f32_scalar(n, x.data(), dy.data(), as.data());
  k::add_f32_avx2(n, x.data(), dy.data(), aa.data());
  CHECK(as == aa);

  auto y1 = dy, y2 = dy;
  k::axpy_f32_scalar(n, 0.37f, x.data(), y1.data());
  k::axpy_f32_avx2(n, 0.37f, x.data(), y2.data());
  CHECK(y1 == y2);
}

TEST_CASE("softmax rows: lanes agree, rows sum to one, values nonnegative") {
  const int64_t rows = 37, cols = 19;
  auto xs = random_vec(static_cast<size_t>(rows * cols), 9, 3.0);
  auto xa = xs;
  k::softmax_rows_f32_scalar(rows, cols, xs.data());
  k::softmax_rows_f32_avx2(rows, cols, xa.data());
  for (int64_t r = 0; r < rows; ++r) {
    double sum_s = 0.0, sum_a = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      const size_t i = static_cast<size_t>(r * cols + c);
      CHECK(xs[i] >= 0.0f);
      sum_s += xs[i];
      sum_a += xa[i];
      CHECK(std::abs(xs[i] - xa[i]) < 2e-6);
    }
    CHECK(sum_s == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sum_a == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("adamw lanes agree bit for bit") {
  const size_t n = 517;
  auto p1 = random_vec(n, 21), p2 = p1;
  const auto g = random_vec(n, 22);
  auto m1 = random_vec(n, 23, 0.1), m2 = m1;
  auto v1 = random_vec(n, 24, 0.01), v2 = v1;
  for (auto& x : v1) x = std::abs(x);
  v2 = v1;
  k::adamw_f32_scalar(n, p1.data(), g.data(), m1.data(), v1.data(), 1e-3f,
                      0.9f, 0.999f, 1e-8f, 0.01f, 0.1f, 0.001f);
  k::adamw_f32_avx2(n, p2.data(), g.data(), m2.data(), v2.data(), 1e-3f, 0.9f,
                    0.999f, 1e-8f, 0.01f, 0.1f, 0.001f);
  CHECK(p1 == p2);
  CHECK(m1 == m2);
  CHECK(v1 == v2);
}

TEST_CASE("runtime dispatch override") {
  const auto saved = k::active_isa();
  k::set_active_isa(k::Isa::kScalar);
  CHECK(k::active_isa() == k::Isa::kScalar);
  k::set_active_isa(saved);
  if (k::detect_best_isa() == k::Isa::kAvx2) {
    INFO("avx2 lane active on this host");
    CHECK(k::isa_name(k::detect_best_isa()) == std::string("avx2"));
  }
}

TEST_CASE("parallel_for covers the range exactly once") {
  const int64_t n = 1000;
  std::vector<int> hits(static_cast<size_t>(n), 0);
  k::parallel_for(n, [&](int64_t b, int64_t e) {
    for (int64_t i = b; i < e; ++i) hits[static_cast<size_t>(i)]++;
  });
  for (int h : hits) CHECK(h == 1);
}
