#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>

#include "lasco/chansim/chansim.hpp"
#include "lasco/io/file_io.hpp"

using namespace lasco;
using namespace lasco::chansim;

namespace {
const double kPi = 3.14159265358979323846;

EnvironmentSpec single_path_env() {
  EnvironmentSpec e;
  e.env_id = 1;
  e.is_los = false;
  e.n_clusters = 1;
  e.n_subpaths = 1;
  e.mean_aod_rad = {0.0};
  e.angle_spread_rad = {1e-12};
  e.cluster_delay_s = {0.0};
  e.cluster_power = {1.0};
  e.seed = 1;
  return e;
}
}  // namespace

TEST_CASE("steering vector: trivial angles and unit modulus") {
  ArrayConfig cfg = ArrayConfig::desk();

  auto a0 = steering_vector(0.0, cfg);
  for (const auto& z : a0) {
    CHECK(z.real() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(z.imag() == doctest::Approx(0.0).epsilon(1e-15));
  }

  ArrayConfig two = cfg;
  two.n_tx = 2;
  auto a90 = steering_vector(kPi / 2.0, two);
  CHECK(a90[0].real() == doctest::Approx(1.0));
  CHECK(a90[1].real() == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(a90[1].imag()) < 1e-12);

  // direct evaluation oracle at theta = 0.3
  ArrayConfig four = cfg;
  four.n_tx = 4;
  const double theta = 0.3;
  auto a = steering_vector(theta, four);
  for (int t = 0; t < 4; ++t) {
    CHECK(std::abs(a[static_cast<size_t>(t)]) == doctest::Approx(1.0).epsilon(1e-12));
    const double phase = 2.0 * kPi * 0.5 * t * std::sin(theta);
    CHECK(std::arg(a[static_cast<size_t>(t)]) ==
          doctest::Approx(std::remainder(phase, 2.0 * kPi)).epsilon(1e-10));
  }

  // unit modulus holds for arbitrary angles
  nn::Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto v = steering_vector(rng.uniform(-10.0, 10.0), cfg);
    for (const auto& z : v) CHECK(std::abs(std::abs(z) - 1.0) < 1e-12);
  }
}

TEST_CASE("sample_environment: LOS parity, determinism, invariants") {
  const ArrayConfig arr = ArrayConfig::desk();
  const auto e101 = sample_environment(101, 200.0, 42, arr);
  CHECK_FALSE(e101.is_los);
  const auto e102 = sample_environment(102, 200.0, 42, arr);
  CHECK(e102.is_los);
  CHECK(e102.rician_k >= 3.0);
  CHECK(e102.rician_k <= 10.0);

  const auto again = sample_environment(101, 200.0, 42, arr);
  CHECK(again.mean_aod_rad == e101.mean_aod_rad);
  CHECK(again.cluster_delay_s == e101.cluster_delay_s);
  CHECK(again.cluster_power == e101.cluster_power);

  double psum = 0.0;
  for (double p : e101.cluster_power) psum += p;
  CHECK(psum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e101.radius_m == 5.0);
  CHECK(std::hypot(e101.center_x_m, e101.center_y_m) <= 200.0);

  // different seeds draw different geometry
  const auto other = sample_environment(101, 200.0, 43, arr);
  CHECK(other.mean_aod_rad != e101.mean_aod_rad);
}

TEST_CASE("synthesize_channel: single-path collapse to the steering vector") {
  ArrayConfig cfg = ArrayConfig::desk();
  const auto env = single_path_env();
  nn::Rng rng(9);
  const auto raw = synthesize_channel_raw(env, cfg, rng);
  // every column proportional to the (jittered) steering vector; delay 0
  // means no frequency selectivity, so all columns are identical
  for (int t = 0; t < cfg.n_tx; ++t)
    for (int c = 1; c < cfg.n_sc; ++c) {
      const auto a = raw[static_cast<size_t>(t) * cfg.n_sc];
      const auto b = raw[static_cast<size_t>(t) * cfg.n_sc + c];
      CHECK(std::abs(a - b) < 1e-12);
    }
  // column direction matches a steering vector: |h_t| equal across antennas
  for (int t = 1; t < cfg.n_tx; ++t)
    CHECK(std::abs(std::abs(raw[static_cast<size_t>(t) * cfg.n_sc]) -
                   std::abs(raw[0])) < 1e-12);
}

TEST_CASE("synthesize_channel: zero delays mean no frequency selectivity") {
  ArrayConfig cfg = ArrayConfig::desk();
  const auto base = sample_environment(7, 200.0, 5, cfg);
  EnvironmentSpec env = base;
  for (auto& d : env.cluster_delay_s) d = 0.0;
  nn::Rng rng(11);
  const auto raw = synthesize_channel_raw(env, cfg, rng);
  for (int t = 0; t < cfg.n_tx; ++t)
    for (int c = 1; c < cfg.n_sc; ++c)
      CHECK(std::abs(raw[static_cast<size_t>(t) * cfg.n_sc] -
                     raw[static_cast<size_t>(t) * cfg.n_sc + c]) < 1e-9);
}

TEST_CASE("synthesize_channel: raw power expectation and exact normalization") {
  ArrayConfig cfg = ArrayConfig::desk();
  cfg.n_tx = 4;
  cfg.n_sc = 4;
  const auto env = sample_environment(3, 200.0, 17, cfg);

  // Monte-Carlo oracle: E ||H||_F^2 == n_tx * n_sc for the raw draw
  nn::Rng rng(23);
  const int draws = 12000;
  double acc = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto raw = synthesize_channel_raw(env, cfg, rng);
    for (const auto& z : raw) acc += std::norm(z);
  }
  const double mean = acc / draws;
  CHECK(mean == doctest::Approx(cfg.n_tx * cfg.n_sc).epsilon(0.05));

  // normalized samples carry exactly n_tx*n_sc Frobenius power
  nn::Rng rng2(24);
  for (int i = 0; i < 10; ++i) {
    const auto s = synthesize_channel(env, cfg, rng2);
    double fro = 0.0;
    for (const auto& z : s.h) fro += std::norm(z);
    CHECK(fro == doctest::Approx(cfg.n_tx * cfg.n_sc).epsilon(1e-4));
  }

  // determinism: same env, same rng state
  nn::Rng r1(77), r2(77);
  const auto s1 = synthesize_channel(env, cfg, r1);
  const auto s2 = synthesize_channel(env, cfg, r2);
  CHECK(s1.h_realvec == s2.h_realvec);
}

TEST_CASE("vectorize/devectorize: layout and round trip") {
  // 1x1 pure imaginary: [0, 1]
  std::vector<std::complex<float>> h1 = {{0.0f, 1.0f}};
  const auto v1 = vectorize_channel(h1, 1, 1);
  CHECK(v1 == std::vector<float>{0.0f, 1.0f});

  nn::Rng rng(5);
  std::vector<std::complex<float>> h(6);
  for (auto& z : h)
    z = {static_cast<float>(rng.normal()), static_cast<float>(rng.normal())};
  const auto v = vectorize_channel(h, 2, 3);
  CHECK(devectorize_channel(v, 2, 3) == h);
}

TEST_CASE("generate_dataset: split sizes, disjointness, minimum size") {
  ArrayConfig cfg = ArrayConfig::desk();
  cfg.n_tx = 2;
  cfg.n_sc = 2;
  const auto env = sample_environment(4, 200.0, 2, cfg);

  const auto ds = generate_dataset(env, 10, cfg);
  CHECK(ds.train_idx.size() == 8);
  CHECK(ds.val_idx.size() == 1);
  CHECK(ds.test_idx.size() == 1);

  CHECK_THROWS(generate_dataset(env, 9, cfg));

  const auto big = generate_dataset(env, 100, cfg);
  CHECK(big.train_idx.size() == 80);
  CHECK(big.val_idx.size() == 10);
  CHECK(big.test_idx.size() == 10);
  std::set<uint32_t> seen;
  for (auto i : big.train_idx) seen.insert(i);
  for (auto i : big.val_idx) seen.insert(i);
  for (auto i : big.test_idx) seen.insert(i);
  CHECK(seen.size() == 100);

  // byte-level determinism through the container format
  const auto ds2 = generate_dataset(env, 100, cfg);
  const std::string p1 = "/tmp/lasco_test_ds1.lds", p2 = "/tmp/lasco_test_ds2.lds";
  save_dataset(big, p1);
  save_dataset(ds2, p2);
  CHECK(io::read_file(p1) == io::read_file(p2));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("mix_datasets: pooling, permutation, config mismatch") {
  ArrayConfig cfg = ArrayConfig::desk();
  cfg.n_tx = 2;
  cfg.n_sc = 2;
  std::vector<Dataset> parts;
  for (int id = 1; id <= 3; ++id)
    parts.push_back(
        generate_dataset(sample_environment(id, 200.0, 6, cfg), 20, cfg));

  const auto mixed = mix_datasets(parts, 99);
  CHECK(mixed.samples.size() == 60);
  CHECK(mixed.train_idx.size() == 48);
  CHECK(mixed.val_idx.size() == 6);
  CHECK(mixed.test_idx.size() == 6);
  CHECK(mixed.source_envs.size() == 3);

  const auto mixed2 = mix_datasets(parts, 99);
  CHECK(mixed.train_idx == mixed2.train_idx);

  // single dataset in: same samples, order permuted
  const auto single = mix_datasets(std::span<const Dataset>(parts.data(), 1), 4);
  CHECK(single.samples.size() == 20);
  CHECK(single.train_idx.size() == parts[0].train_idx.size());

  auto other = parts;
  other[1].arr.n_tx = 4;
  CHECK_THROWS(mix_datasets(other, 1));
}

TEST_CASE("dataset file: format fields and error paths") {
  ArrayConfig cfg = ArrayConfig::desk();
  cfg.n_tx = 2;
  cfg.n_sc = 2;
  const auto env = sample_environment(8, 200.0, 3, cfg);
  const auto ds = generate_dataset(env, 12, cfg);
  const std::string path = "/tmp/lasco_test_fmt.lds";
  save_dataset(ds, path);

  auto bytes = io::read_file(path);
  CHECK(std::string(bytes.begin(), bytes.begin() + 8) == "LASCODS1");

  const auto loaded = load_dataset(path);
  CHECK(loaded.env_id == ds.env_id);
  CHECK(loaded.arr == ds.arr);
  CHECK(loaded.samples.size() == ds.samples.size());
  CHECK(loaded.train_idx == ds.train_idx);
  for (size_t i = 0; i < ds.samples.size(); ++i)
    CHECK(loaded.samples[i].h == ds.samples[i].h);
  CHECK(loaded.env.is_los == ds.env.is_los);

  // truncation -> corrupt-file error
  bytes.resize(bytes.size() / 2);
  io::write_file_atomic(path, bytes.data(), bytes.size());
  CHECK_THROWS_AS(load_dataset(path), CorruptFileError);
  std::filesystem::remove(path);
}
