#include <cmath>

#include "lasco/chansim/chansim.hpp"

namespace lasco::chansim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;
constexpr double kAodJitterStd = 1.0 * kDeg;  // per-sample UE movement
}  // namespace

std::vector<float> vectorize_channel(const std::vector<std::complex<float>>& h,
                                     int n_tx, int n_sc) {
  const size_t n = static_cast<size_t>(n_tx) * n_sc;
  LASCO_CHECK_SHAPE(h.size() == n, "vectorize: channel size mismatch");
  std::vector<float> v(2 * n);
  // [Re column-major ; Im column-major]; H itself is row-major [t][c]
  for (int c = 0; c < n_sc; ++c)
    for (int t = 0; t < n_tx; ++t) {
      const auto z = h[static_cast<size_t>(t) * n_sc + c];
      v[static_cast<size_t>(c) * n_tx + t] = z.real();
      v[n + static_cast<size_t>(c) * n_tx + t] = z.imag();
    }
  return v;
}

std::vector<std::complex<float>> devectorize_channel(
    const std::vector<float>& v, int n_tx, int n_sc) {
  const size_t n = static_cast<size_t>(n_tx) * n_sc;
  LASCO_CHECK_SHAPE(v.size() == 2 * n, "devectorize: vector size mismatch");
  std::vector<std::complex<float>> h(n);
  for (int c = 0; c < n_sc; ++c)
    for (int t = 0; t < n_tx; ++t)
      h[static_cast<size_t>(t) * n_sc + c] = {
          v[static_cast<size_t>(c) * n_tx + t],
          v[n + static_cast<size_t>(c) * n_tx + t]};
  return h;
}

std::vector<std::complex<double>> steering_vector(double theta,
                                                  const ArrayConfig& cfg) {
  cfg.validate();
  std::vector<std::complex<double>> a(static_cast<size_t>(cfg.n_tx));
  const double w = 2.0 * kPi * cfg.spacing_over_lambda * std::sin(theta);
  for (int t = 0; t < cfg.n_tx; ++t)
    a[static_cast<size_t>(t)] = std::polar(1.0, w * t);
  return a;
}

std::vector<std::complex<double>> synthesize_channel_raw(
    const EnvironmentSpec& env, const ArrayConfig& cfg, nn::Rng& rng) {
  env.validate();
  cfg.validate();
  const int nt = cfg.n_tx, nc = cfg.n_sc;
  std::vector<std::complex<double>> h(static_cast<size_t>(nt) * nc,
                                      {0.0, 0.0});

  for (int p = 0; p < env.n_clusters; ++p) {
    const double jitter = rng.normal(0.0, kAodJitterStd);
    const double mean_aod = env.mean_aod_rad[static_cast<size_t>(p)] + jitter;
    const double spread = env.angle_spread_rad[static_cast<size_t>(p)];
    const double tau = env.cluster_delay_s[static_cast<size_t>(p)];
    // per-subpath power so the cluster carries cluster_power[p] in total
    const double gstd = std::sqrt(env.cluster_power[static_cast<size_t>(p)] /
                                  (2.0 * env.n_subpaths));
    for (int s = 0; s < env.n_subpaths; ++s) {
      const double theta = mean_aod + rng.laplace(spread);
      const std::complex<double> g(rng.normal(0.0, gstd),
                                   rng.normal(0.0, gstd));
      const auto steer = steering_vector(theta, cfg);
      for (int i = 0; i < nc; ++i) {
        const std::complex<double> alpha =
            g * std::polar(1.0, -2.0 * kPi * cfg.subcarrier_freq(i) * tau);
        for (int t = 0; t < nt; ++t)
          h[static_cast<size_t>(t) * nc + i] += alpha * steer[static_cast<size_t>(t)];
      }
    }
  }

  if (env.is_los) {
    // Rician dominant path at delay zero with a random global phase
    const double k = env.rician_k;
    const double diff_scale = std::sqrt(1.0 / (k + 1.0));
    const double los_scale = std::sqrt(k / (k + 1.0));
    for (auto& z : h) z *= diff_scale;
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const auto steer = steering_vector(env.los_aod_rad, cfg);
    const std::complex<double> g = std::polar(los_scale, phase);
    for (int t = 0; t < nt; ++t)
      for (int i = 0; i < nc; ++i)
        h[static_cast<size_t>(t) * nc + i] += g * steer[static_cast<size_t>(t)];
  }
  return h;
}

CsiSample synthesize_channel(const EnvironmentSpec& env, const ArrayConfig& cfg,
                             nn::Rng& rng) {
  const auto raw = synthesize_channel_raw(env, cfg, rng);
  double fro2 = 0.0;
  for (const auto& z : raw) fro2 += std::norm(z);
  LASCO_CHECK(fro2 > 0, "degenerate all-zero channel draw");
  const double scale =
      std::sqrt(static_cast<double>(cfg.n_tx) * cfg.n_sc / fro2);

  CsiSample s;
  s.h.resize(raw.size());
  for (size_t i = 0; i < raw.size(); ++i)
    s.h[i] = {static_cast<float>(raw[i].real() * scale),
              static_cast<float>(raw[i].imag() * scale)};
  s.h_realvec = vectorize_channel(s.h, cfg.n_tx, cfg.n_sc);
  return s;
}

}  // namespace lasco::chansim
