#include <algorithm>
#include <numeric>

#include "lasco/chansim/chansim.hpp"

namespace lasco::chansim {

namespace {

// 8:1:1 with the remainder going to train; indices assigned after a seeded
// shuffle of the sample order.
void assign_splits(Dataset& ds, uint64_t split_seed) {
  const size_t n = ds.samples.size();
  const size_t n_val = n / 10;
  const size_t n_test = n / 10;
  const size_t n_train = n - n_val - n_test;

  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  nn::Rng rng(split_seed);
  rng.shuffle(order);

  ds.train_idx.assign(order.begin(), order.begin() + static_cast<long>(n_train));
  ds.val_idx.assign(order.begin() + static_cast<long>(n_train),
                    order.begin() + static_cast<long>(n_train + n_val));
  ds.test_idx.assign(order.begin() + static_cast<long>(n_train + n_val),
                     order.end());
}

}  // namespace

Dataset generate_dataset(const EnvironmentSpec& env, int n_samples,
                         const ArrayConfig& cfg) {
  LASCO_CHECK(n_samples >= 10, "need at least 10 samples for an 8:1:1 split");
  env.validate();
  Dataset ds;
  ds.env_id = env.env_id;
  ds.arr = cfg;
  ds.env = env;
  ds.source_envs = {env.env_id};
  ds.samples.reserve(static_cast<size_t>(n_samples));

  nn::Rng rng(nn::derive_seed(env.seed, "samples",
                              static_cast<uint64_t>(env.env_id)));
  for (int i = 0; i < n_samples; ++i)
    ds.samples.push_back(synthesize_channel(env, cfg, rng));

  assign_splits(ds, nn::derive_seed(env.seed, "split",
                                    static_cast<uint64_t>(env.env_id)));
  return ds;
}

Dataset mix_datasets(std::span<const Dataset> parts, uint64_t seed) {
  LASCO_CHECK(!parts.empty(), "mix_datasets: empty input");
  const ArrayConfig& arr = parts.front().arr;
  for (const auto& d : parts)
    LASCO_CHECK(d.arr == arr, "mix_datasets: mixed array configs");

  Dataset out;
  out.env_id = -1;
  out.arr = arr;
  out.env = parts.front().env;
  out.env.env_id = -1;

  // concatenate, remembering global indices per split
  std::vector<uint32_t> tr, va, te;
  for (const auto& d : parts) {
    out.source_envs.insert(out.source_envs.end(), d.source_envs.begin(),
                           d.source_envs.end());
    const uint32_t base = static_cast<uint32_t>(out.samples.size());
    out.samples.insert(out.samples.end(), d.samples.begin(), d.samples.end());
    for (uint32_t i : d.train_idx) tr.push_back(base + i);
    for (uint32_t i : d.val_idx) va.push_back(base + i);
    for (uint32_t i : d.test_idx) te.push_back(base + i);
  }
  nn::Rng rng(nn::derive_seed(seed, "mix"));
  rng.shuffle(tr);
  rng.shuffle(va);
  rng.shuffle(te);
  out.train_idx = std::move(tr);
  out.val_idx = std::move(va);
  out.test_idx = std::move(te);
  return out;
}

}  // namespace lasco::chansim
