#include <doctest.h>

#include <cmath>

#include "lasco/collab/collab.hpp"
#include "lasco/feedback/codec.hpp"
#include "lasco/nn/rng.hpp"

using namespace lasco;
using namespace lasco::feedback;

namespace {

chansim::CsiSample random_sample(int n_tx, int n_sc, uint64_t seed) {
  nn::Rng rng(seed);
  chansim::CsiSample s;
  s.h.resize(static_cast<size_t>(n_tx) * n_sc);
  for (auto& z : s.h)
    z = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
  s.h_realvec = chansim::vectorize_channel(s.h, n_tx, n_sc);
  return s;
}

double rel_fro(const std::vector<double>& a, const std::vector<double>& b) {
  double num = 0, den = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += a[i] * a[i];
  }
  return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("codec: pseudo-inverse identities") {
  for (const auto [m, dim] : {std::pair<int64_t, int64_t>{8, 32},
                              {32, 128},
                              {128, 128}}) {
    const auto c = ProjectionCodec::build(m, dim, 99);
    // A A+ A == A
    const auto& a = c.a();
    const auto& p = c.a_pinv();
    std::vector<double> apa(static_cast<size_t>(m * dim), 0.0);
    std::vector<double> ap(static_cast<size_t>(m * m), 0.0);
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < m; ++j) {
        double acc = 0;
        for (int64_t k = 0; k < dim; ++k)
          acc += a[static_cast<size_t>(i * dim + k)] *
                 p[static_cast<size_t>(k * m + j)];
        ap[static_cast<size_t>(i * m + j)] = acc;
      }
    for (int64_t i = 0; i < m; ++i)
      for (int64_t j = 0; j < dim; ++j) {
        double acc = 0;
        for (int64_t k = 0; k < m; ++k)
          acc += ap[static_cast<size_t>(i * m + k)] *
                 a[static_cast<size_t>(k * dim + j)];
        apa[static_cast<size_t>(i * dim + j)] = acc;
      }
    CHECK(rel_fro(std::vector<double>(a.begin(), a.end()), apa) < 1e-6);

    // A+ A A+ == A+
    std::vector<double> pap(p.size(), 0.0);
    for (int64_t i = 0; i < dim; ++i)
      for (int64_t j = 0; j < m; ++j) {
        double acc = 0;
        for (int64_t k = 0; k < m; ++k)
          acc += p[static_cast<size_t>(i * m + k)] *
                 ap[static_cast<size_t>(k * m + j)];
        pap[static_cast<size_t>(i * m + j)] = acc;
      }
    CHECK(rel_fro(std::vector<double>(p.begin(), p.end()), pap) < 1e-6);
  }
}

TEST_CASE("codec: square case inverts exactly") {
  const int64_t dim = 32;
  const auto c = ProjectionCodec::build(dim, dim, 7);
  nn::Rng rng(1);
  std::vector<double> v(static_cast<size_t>(dim));
  for (auto& x : v) x = rng.normal();
  std::vector<double> s(static_cast<size_t>(dim)), back(static_cast<size_t>(dim));
  c.compress(std::span<const double>(v), std::span<double>(s));
  c.reconstruct(std::span<const double>(s), std::span<double>(back));
  for (size_t i = 0; i < v.size(); ++i)
    CHECK(back[i] == doctest::Approx(v[i]).epsilon(1e-6));
}

TEST_CASE("codec: bad arguments") {
  CHECK_THROWS(ProjectionCodec::build(0, 16, 1));
  CHECK_THROWS(ProjectionCodec::build(17, 16, 1));
}

TEST_CASE("vec_real/devec_real: pure imaginary case and exact round trip") {
  chansim::CsiSample s;
  s.h = {{0.0f, 1.0f}};
  s.h_realvec = chansim::vectorize_channel(s.h, 1, 1);
  CHECK(vec_real(s) == std::vector<float>{0.0f, 1.0f});

  const auto r = random_sample(4, 8, 3);
  const auto v = vec_real(r);
  const auto back = devec_real(v, 4, 8);
  CHECK(back.h == r.h);

  chansim::CsiSample zero;
  zero.h.assign(4, {0.0f, 0.0f});
  zero.h_realvec = chansim::vectorize_channel(zero.h, 2, 2);
  for (float x : vec_real(zero)) CHECK(x == 0.0f);
}

TEST_CASE("compress: linearity and the lossless square case") {
  const int n_tx = 4, n_sc = 4;
  const int64_t dim = 2 * n_tx * n_sc;
  const auto codec = ProjectionCodec::build(12, dim, 5);

  const auto s1 = random_sample(n_tx, n_sc, 11);
  const auto s2 = random_sample(n_tx, n_sc, 12);
  const auto c1 = compress(s1, codec);
  const auto c2 = compress(s2, codec);

  // compress(a h1 + b h2) == a c1 + b c2
  chansim::CsiSample mix;
  mix.h.resize(s1.h.size());
  const float a = 0.75f, b = -1.5f;
  for (size_t i = 0; i < mix.h.size(); ++i) mix.h[i] = a * s1.h[i] + b * s2.h[i];
  mix.h_realvec = chansim::vectorize_channel(mix.h, n_tx, n_sc);
  const auto cm = compress(mix, codec);
  for (size_t i = 0; i < cm.size(); ++i)
    CHECK(cm[i] == doctest::Approx(a * c1[i] + b * c2[i]).epsilon(1e-4));

  // zero in, zero out
  chansim::CsiSample zero;
  zero.h.assign(static_cast<size_t>(n_tx) * n_sc, {0.0f, 0.0f});
  zero.h_realvec = chansim::vectorize_channel(zero.h, n_tx, n_sc);
  for (float x : compress(zero, codec)) CHECK(x == 0.0f);

  // M == dim: NMSE < 1e-10 in double precision
  const auto square = ProjectionCodec::build(dim, dim, 6);
  std::vector<double> v(static_cast<size_t>(dim));
  nn::Rng rng(2);
  for (auto& x : v) x = rng.normal();
  std::vector<double> cw(static_cast<size_t>(dim)), back(static_cast<size_t>(dim));
  square.compress(std::span<const double>(v), std::span<double>(cw));
  square.reconstruct(std::span<const double>(cw), std::span<double>(back));
  CHECK(collab::nmse<double>(v, back) < 1e-10);
}

TEST_CASE("coarse_reconstruct: consistency and monotone quality in M") {
  const int n_tx = 8, n_sc = 8;
  const int64_t dim = 2 * n_tx * n_sc;

  // s = A v implies A vec(H_in) == s (projector property)
  const auto codec = ProjectionCodec::build(24, dim, 9);
  const auto smp = random_sample(n_tx, n_sc, 31);
  const auto cw = compress(smp, codec);
  const auto hin = coarse_reconstruct(std::span<const float>(cw), codec);
  std::vector<float> cw2(cw.size());
  codec.compress(std::span<const float>(hin), std::span<float>(cw2));
  for (size_t i = 0; i < cw.size(); ++i)
    CHECK(cw2[i] == doctest::Approx(cw[i]).epsilon(1e-3));

  // s = 0 -> H_in = 0
  std::vector<float> zs(static_cast<size_t>(codec.codeword_len()), 0.0f);
  for (float x : coarse_reconstruct(std::span<const float>(zs), codec))
    CHECK(x == 0.0f);

  // NMSE decreases as M grows (100 samples per M)
  double prev = 2.0;
  for (int64_t m : {32, 64, 96, 128}) {
    const auto c = ProjectionCodec::build(m, dim, 13);
    double acc = 0.0;
    for (int i = 0; i < 100; ++i) {
      const auto s = random_sample(n_tx, n_sc, 1000 + static_cast<uint64_t>(i));
      const auto w = compress(s, c);
      const auto r = coarse_reconstruct(std::span<const float>(w), c);
      acc += collab::nmse<float>(s.h_realvec, r);
    }
    acc /= 100.0;
    CHECK(acc < prev);
    if (m < dim) CHECK(acc > 0.0);
    prev = acc;
  }
}

TEST_CASE("compression ratio") {
  chansim::ArrayConfig paper = chansim::ArrayConfig::paper();
  const auto c100 = ProjectionCodec::build(100, paper.real_dim(), 1);
  CHECK(compression_ratio(c100, paper) == doctest::Approx(20.48));
  const auto c150 = ProjectionCodec::build(150, paper.real_dim(), 1);
  CHECK(compression_ratio(c150, paper) == doctest::Approx(13.653).epsilon(1e-3));

  chansim::ArrayConfig desk = chansim::ArrayConfig::desk();
  const auto c32 = ProjectionCodec::build(32, desk.real_dim(), 1);
  CHECK(compression_ratio(c32, desk) == doctest::Approx(4.0));
  const auto full = ProjectionCodec::build(desk.real_dim(), desk.real_dim(), 1);
  CHECK(compression_ratio(full, desk) == doctest::Approx(1.0));

  // dimension mismatch is an error
  CHECK_THROWS(compression_ratio(c100, desk));
}
