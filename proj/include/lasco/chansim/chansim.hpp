#pragma once

#include <span>

#include "lasco/chansim/types.hpp"
#include "lasco/nn/rng.hpp"

namespace lasco::chansim {

// ULA steering vector: entry t = exp(j 2 pi t (delta/lambda) sin(theta)).
std::vector<std::complex<double>> steering_vector(double theta,
                                                  const ArrayConfig& cfg);

// Draws the cluster geometry of one region. Even env ids are LOS, odd are
// NLOS. Deterministic in (env_id, seed); the array config bounds the delay
// spread.
EnvironmentSpec sample_environment(int env_id, double cell_radius_m,
                                   uint64_t seed, const ArrayConfig& cfg);

// Clustered multipath draw before power normalization (complex double).
std::vector<std::complex<double>> synthesize_channel_raw(
    const EnvironmentSpec& env, const ArrayConfig& cfg, nn::Rng& rng);

// Normalized sample: ||H||_F^2 == n_tx * n_sc.
CsiSample synthesize_channel(const EnvironmentSpec& env, const ArrayConfig& cfg,
                             nn::Rng& rng);

// n_samples draws plus a seeded 8:1:1 split (train takes the remainder).
// Throws on n_samples < 10.
Dataset generate_dataset(const EnvironmentSpec& env, int n_samples,
                         const ArrayConfig& cfg);

// Pools per-split sample lists across datasets and reshuffles each split.
Dataset mix_datasets(std::span<const Dataset> parts, uint64_t seed);

void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace lasco::chansim
