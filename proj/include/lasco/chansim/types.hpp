#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "lasco/common.hpp"

namespace lasco::chansim {

// Uniform linear array + OFDM grid.
struct ArrayConfig {
  int n_tx = 8;
  int n_sc = 8;
  double carrier_freq_hz = 2.655e9;
  double bandwidth_hz = 70e6;
  double spacing_over_lambda = 0.5;

  bool operator==(const ArrayConfig&) const = default;
  void validate() const;

  int64_t real_dim() const { return 2ll * n_tx * n_sc; }

  // Baseband frequency of subcarrier i, centred on the carrier.
  double subcarrier_freq(int i) const {
    return (static_cast<double>(i) - (n_sc - 1) / 2.0) * bandwidth_hz / n_sc;
  }

  static ArrayConfig desk();   // 8 antennas x 8 subcarriers
  static ArrayConfig paper();  // 32 x 32
};

// One circular deployment region with its multipath cluster draw.
struct EnvironmentSpec {
  int env_id = 0;
  double center_x_m = 0.0;
  double center_y_m = 0.0;
  double radius_m = 5.0;
  bool is_los = false;
  int n_clusters = 1;
  int n_subpaths = 1;
  std::vector<double> mean_aod_rad;      // per cluster
  std::vector<double> angle_spread_rad;  // per cluster
  std::vector<double> cluster_delay_s;   // per cluster
  std::vector<double> cluster_power;     // per cluster, sums to 1
  double rician_k = 0.0;                 // linear, LOS only
  double los_aod_rad = 0.0;              // LOS only
  uint64_t seed = 0;

  void validate() const;
};

// One CSI draw: complex H (row-major antennas x subcarriers) plus its fixed
// real vectorization [Re column-major ; Im column-major].
struct CsiSample {
  std::vector<std::complex<float>> h;  // n_tx * n_sc
  std::vector<float> h_realvec;        // 2 * n_tx * n_sc
};

std::vector<float> vectorize_channel(const std::vector<std::complex<float>>& h,
                                     int n_tx, int n_sc);
std::vector<std::complex<float>> devectorize_channel(
    const std::vector<float>& v, int n_tx, int n_sc);

struct Dataset {
  int env_id = 0;  // -1 for mixed pools
  ArrayConfig arr;
  EnvironmentSpec env;
  std::vector<CsiSample> samples;
  std::vector<uint32_t> train_idx, val_idx, test_idx;
  std::vector<int> source_envs;  // env ids pooled into this dataset
};

}  // namespace lasco::chansim
