#include <cmath>

#include "lasco/chansim/chansim.hpp"

namespace lasco::chansim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;
// cluster delay scale; also the decay constant of the power profile
constexpr double kDelayMeanS = 100e-9;
}  // namespace

void ArrayConfig::validate() const {
  LASCO_CHECK(n_tx >= 1 && n_sc >= 1, "array dims must be >= 1");
  LASCO_CHECK(spacing_over_lambda > 0, "spacing_over_lambda must be > 0");
  LASCO_CHECK(bandwidth_hz > 0, "bandwidth must be > 0");
}

ArrayConfig ArrayConfig::desk() { return ArrayConfig{}; }

ArrayConfig ArrayConfig::paper() {
  ArrayConfig a;
  a.n_tx = 32;
  a.n_sc = 32;
  return a;
}

void EnvironmentSpec::validate() const {
  LASCO_CHECK(radius_m > 0, "environment radius must be > 0");
  LASCO_CHECK(n_clusters >= 1 && n_subpaths >= 1, "cluster counts must be >= 1");
  LASCO_CHECK(static_cast<int>(mean_aod_rad.size()) == n_clusters &&
                  static_cast<int>(angle_spread_rad.size()) == n_clusters &&
                  static_cast<int>(cluster_delay_s.size()) == n_clusters &&
                  static_cast<int>(cluster_power.size()) == n_clusters,
              "per-cluster arrays must have n_clusters entries");
  double psum = 0.0;
  for (double p : cluster_power) psum += p;
  LASCO_CHECK(std::abs(psum - 1.0) < 1e-9, "cluster powers must sum to 1");
  LASCO_CHECK(!is_los || rician_k > 0, "LOS environment needs a Rician K");
}

EnvironmentSpec sample_environment(int env_id, double cell_radius_m,
                                   uint64_t seed, const ArrayConfig& cfg) {
  LASCO_CHECK(cell_radius_m > 0, "cell radius must be > 0");
  cfg.validate();
  EnvironmentSpec e;
  e.env_id = env_id;
  e.seed = seed;
  e.is_los = (env_id % 2 == 0);

  nn::Rng rng(nn::derive_seed(seed, "env", static_cast<uint64_t>(env_id)));

  // region center uniform in the cell disk
  const double r = cell_radius_m * std::sqrt(rng.uniform());
  const double phi = rng.uniform(0.0, 2.0 * kPi);
  e.center_x_m = r * std::cos(phi);
  e.center_y_m = r * std::sin(phi);
  e.radius_m = 5.0;

  e.n_clusters = e.is_los ? rng.uniform_int(2, 4) : rng.uniform_int(3, 6);
  e.n_subpaths = 10;

  // delays beyond one OFDM symbol span alias, so clip there
  const double delay_cap = cfg.n_sc / cfg.bandwidth_hz;
  for (int p = 0; p < e.n_clusters; ++p) {
    e.mean_aod_rad.push_back(rng.uniform(-kPi / 3.0, kPi / 3.0));
    e.angle_spread_rad.push_back(rng.uniform(1.0 * kDeg, 8.0 * kDeg));
    const double tau = std::min(rng.exponential(kDelayMeanS), delay_cap);
    e.cluster_delay_s.push_back(tau);
  }
  // exponential power decay in delay, normalized to unit total
  double psum = 0.0;
  for (int p = 0; p < e.n_clusters; ++p) {
    const double w = std::exp(-e.cluster_delay_s[static_cast<size_t>(p)] /
                              kDelayMeanS);
    e.cluster_power.push_back(w);
    psum += w;
  }
  for (auto& w : e.cluster_power) w /= psum;

  if (e.is_los) {
    e.rician_k = rng.uniform(3.0, 10.0);
    e.los_aod_rad = rng.uniform(-kPi / 3.0, kPi / 3.0);
  }
  e.validate();
  return e;
}

}  // namespace lasco::chansim
