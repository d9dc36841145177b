#include <algorithm>

#include "lasco/harness/harness.hpp"

namespace lasco::harness {

void gather_rows(const nn::TensorF& src, std::span<const int64_t> ids,
                 nn::TensorF& dst) {
  const int64_t per = src.size() / src.dim(0);
  const auto shape = std::vector<int64_t>{static_cast<int64_t>(ids.size()),
                                          src.dim(1), src.dim(2)};
  if (dst.shape != shape) dst.resize(shape);
  for (size_t i = 0; i < ids.size(); ++i)
    std::copy_n(src.data() + ids[i] * per, per,
                dst.data() + static_cast<int64_t>(i) * per);
}

void realvec_to_tokens(const float* v, int n_tx, int n_sc, float* tokens) {
  const int64_t n = static_cast<int64_t>(n_tx) * n_sc;
  for (int s = 0; s < n_sc; ++s) {
    float* tok = tokens + static_cast<int64_t>(s) * 2 * n_tx;
    for (int t = 0; t < n_tx; ++t) {
      tok[t] = v[static_cast<int64_t>(s) * n_tx + t];
      tok[n_tx + t] = v[n + static_cast<int64_t>(s) * n_tx + t];
    }
  }
}

void tokens_to_realvec(const float* tokens, int n_tx, int n_sc, float* v) {
  const int64_t n = static_cast<int64_t>(n_tx) * n_sc;
  for (int s = 0; s < n_sc; ++s) {
    const float* tok = tokens + static_cast<int64_t>(s) * 2 * n_tx;
    for (int t = 0; t < n_tx; ++t) {
      v[static_cast<int64_t>(s) * n_tx + t] = tok[t];
      v[n + static_cast<int64_t>(s) * n_tx + t] = tok[n_tx + t];
    }
  }
}

SplitTokens tokenize_split(const chansim::Dataset& ds,
                           std::span<const uint32_t> idx,
                           const feedback::ProjectionCodec& codec) {
  const int n_tx = ds.arr.n_tx, n_sc = ds.arr.n_sc;
  LASCO_CHECK_SHAPE(codec.dim() == ds.arr.real_dim(),
                    "codec dimension does not match dataset");
  SplitTokens out;
  out.n = static_cast<int64_t>(idx.size());
  out.x.resize({out.n, n_sc, 2 * n_tx});
  out.y.resize({out.n, n_sc, 2 * n_tx});

  std::vector<float> cw(static_cast<size_t>(codec.codeword_len()));
  std::vector<float> hin(static_cast<size_t>(codec.dim()));
  const int64_t per = static_cast<int64_t>(n_sc) * 2 * n_tx;
  for (int64_t i = 0; i < out.n; ++i) {
    const auto& s = ds.samples[idx[static_cast<size_t>(i)]];
    codec.compress(std::span<const float>(s.h_realvec), std::span<float>(cw));
    codec.reconstruct(std::span<const float>(cw), std::span<float>(hin));
    realvec_to_tokens(hin.data(), n_tx, n_sc, out.x.data() + i * per);
    realvec_to_tokens(s.h_realvec.data(), n_tx, n_sc, out.y.data() + i * per);
  }
  return out;
}

EnvTokens tokenize_env(const chansim::Dataset& ds,
                       const feedback::ProjectionCodec& codec) {
  EnvTokens env;
  env.env_id = ds.env_id;
  env.n_tx = ds.arr.n_tx;
  env.n_sc = ds.arr.n_sc;
  env.train = tokenize_split(ds, ds.train_idx, codec);
  env.val = tokenize_split(ds, ds.val_idx, codec);
  env.test = tokenize_split(ds, ds.test_idx, codec);
  env.pinv_val_nmse = collab::batch_nmse(env.val.y, env.val.x);
  env.pinv_test_nmse = collab::batch_nmse(env.test.y, env.test.x);
  return env;
}

void TrainConfig::validate() const {
  LASCO_CHECK(batch_size >= 1, "batch_size must be >= 1");
  LASCO_CHECK(max_epochs >= 1, "max_epochs must be >= 1");
  LASCO_CHECK(patience >= 1, "patience must be >= 1");
  LASCO_CHECK(warmup_fraction >= 0.0 && warmup_fraction <= 0.5,
              "warmup_fraction must be in [0, 0.5]");
}

TrainConfig TrainConfig::pretrain_defaults(int epochs, uint64_t seed) {
  TrainConfig c;
  c.max_epochs = epochs;
  c.schedule = nn::LrSchedule::Kind::kWarmupCosine;
  c.lr_init = 0.0;
  c.lr_peak = 1e-3;
  c.lr_final = 1e-5;
  c.warmup_fraction = 0.05;
  c.seed = seed;
  return c;
}

TrainConfig TrainConfig::adapt_defaults(uint64_t seed) {
  TrainConfig c;
  c.max_epochs = 100;
  c.schedule = nn::LrSchedule::Kind::kConstant;
  c.lr_peak = 1e-3;
  c.patience = 20;
  c.seed = seed;
  return c;
}

}  // namespace lasco::harness
