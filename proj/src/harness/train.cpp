#include <algorithm>
#include <cmath>
#include <memory>

#include "lasco/harness/harness.hpp"
#include "lasco/io/file_io.hpp"
#include "lasco/kernels/kernels.hpp"

namespace lasco::harness {

namespace {

// batch-averaged squared error and its gradient
double mse_loss_grad(const nn::TensorF& y_true, const nn::TensorF& y_hat,
                     nn::TensorF& dy) {
  LASCO_CHECK_SHAPE(y_true.same_shape(y_hat), "loss: shape mismatch");
  if (!dy.same_shape(y_hat)) dy.resize(y_hat.shape);
  const int64_t batch = y_true.dim(0);
  const double inv_b = 1.0 / static_cast<double>(batch);
  double loss = 0.0;
  for (int64_t i = 0; i < y_true.size(); ++i) {
    const double r = static_cast<double>(y_hat.v[static_cast<size_t>(i)]) -
                     static_cast<double>(y_true.v[static_cast<size_t>(i)]);
    loss += r * r;
    dy.v[static_cast<size_t>(i)] = static_cast<float>(2.0 * r * inv_b);
  }
  return loss * inv_b;
}

}  // namespace

nn::TensorF batched_forward(const models::ReconNetF& net, const nn::TensorF& x,
                            int batch_size) {
  const int64_t n = x.dim(0);
  const int64_t per = x.size() / n;
  nn::TensorF out(x.shape);
  nn::TensorF xb;
  for (int64_t b0 = 0; b0 < n; b0 += batch_size) {
    const int64_t b1 = std::min<int64_t>(b0 + batch_size, n);
    xb.resize({b1 - b0, x.dim(1), x.dim(2)});
    std::copy_n(x.data() + b0 * per, (b1 - b0) * per, xb.data());
    const nn::TensorF yb = net.forward(xb);
    std::copy_n(yb.data(), (b1 - b0) * per, out.data() + b0 * per);
  }
  return out;
}

PretrainMultiOutcome pretrain_multi(
    std::span<const PretrainSpec> specs, const chansim::Dataset& mixed,
    const feedback::ProjectionCodec& codec, const TrainConfig& cfg,
    const std::function<void(const std::string&)>& log) {
  cfg.validate();
  LASCO_CHECK(!specs.empty(), "pretrain: no models");
  LASCO_CHECK(mixed.source_envs.size() >= 2,
              "pre-training requires a mix of at least 2 environments");

  const SplitTokens train = tokenize_split(mixed, mixed.train_idx, codec);
  const SplitTokens val = tokenize_split(mixed, mixed.val_idx, codec);
  LASCO_CHECK(train.n >= 1 && val.n >= 1, "empty pre-training split");

  PretrainMultiOutcome out;
  out.baseline_val_nmse = collab::batch_nmse(val.y, val.x);
  const size_t n_models = specs.size();
  std::vector<nn::AdamW<float>*> opts;
  std::vector<std::unique_ptr<nn::AdamW<float>>> opt_store;
  for (const auto& spec : specs) {
    out.nets.emplace_back(spec.cfg,
                          nn::derive_seed(cfg.seed, spec.name + "-init"));
    out.nets.back().role = spec.name == "lam" ? models::ModelRole::kBase
                                              : models::ModelRole::kReference;
  }
  for (auto& net : out.nets) {
    opt_store.push_back(std::make_unique<nn::AdamW<float>>(net.params()));
    opts.push_back(opt_store.back().get());
  }
  out.val_traces.resize(n_models);
  out.best_epochs.assign(n_models, 0);

  const int64_t steps_per_epoch =
      (train.n + cfg.batch_size - 1) / cfg.batch_size;
  const int64_t total_steps = steps_per_epoch * cfg.max_epochs;
  const int64_t warmup = static_cast<int64_t>(
      std::llround(cfg.warmup_fraction * static_cast<double>(total_steps)));
  const nn::LrSchedule sched =
      cfg.schedule == nn::LrSchedule::Kind::kWarmupCosine
          ? nn::LrSchedule::warmup_cosine(cfg.lr_init, cfg.lr_peak,
                                          cfg.lr_final, warmup, total_steps)
          : nn::LrSchedule::constant(cfg.lr_peak);

  // one shared shuffle stream: every model sees the identical batch order
  nn::Rng shuffle_rng(nn::derive_seed(cfg.seed, "pretrain-shuffle"));
  std::vector<int64_t> order(static_cast<size_t>(train.n));
  for (int64_t i = 0; i < train.n; ++i) order[static_cast<size_t>(i)] = i;

  std::vector<models::ReconNetF> best = out.nets;
  std::vector<double> best_val(n_models, 0.0);
  bool have_best = false;

  nn::TensorF xb, yb, dy;
  models::ReconNetF::Cache cache;
  int64_t step = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (int64_t b0 = 0; b0 < train.n; b0 += cfg.batch_size) {
      const int64_t b1 = std::min<int64_t>(b0 + cfg.batch_size, train.n);
      const std::span<const int64_t> ids(order.data() + b0,
                                         static_cast<size_t>(b1 - b0));
      gather_rows(train.x, ids, xb);
      gather_rows(train.y, ids, yb);
      const double lr = sched.at(step);
      for (size_t mi = 0; mi < n_models; ++mi) {
        auto& net = out.nets[mi];
        net.params().zero_grads();
        const nn::TensorF y_hat = net.forward_cached(xb, cache);
        mse_loss_grad(yb, y_hat, dy);
        net.backward(cache, dy);
        opts[mi]->step(net.params(), lr);
      }
      ++step;
    }

    std::string line = "epoch " + std::to_string(epoch) + "/" +
                       std::to_string(cfg.max_epochs);
    for (size_t mi = 0; mi < n_models; ++mi) {
      const double v = collab::batch_nmse(
          val.y, batched_forward(out.nets[mi], val.x, cfg.batch_size));
      if (!std::isfinite(v))
        throw NumericalError("pre-training diverged at epoch " +
                             std::to_string(epoch) + " (" + specs[mi].name + ")");
      out.val_traces[mi].push_back(v);
      if (!have_best || v < best_val[mi]) {
        best_val[mi] = v;
        best[mi] = out.nets[mi];
        out.best_epochs[mi] = epoch;
      }
      line += " " + specs[mi].name + "=" + io::format_double(v);
    }
    have_best = true;
    if (log) log(line);
  }

  out.nets = std::move(best);
  return out;
}

PretrainOutcome pretrain(const models::ModelConfig& lam_cfg,
                         const models::ModelConfig& sam_cfg,
                         const chansim::Dataset& mixed,
                         const feedback::ProjectionCodec& codec,
                         const TrainConfig& cfg,
                         const std::function<void(const std::string&)>& log) {
  const PretrainSpec specs[] = {{lam_cfg, "lam"}, {sam_cfg, "sam"}};
  auto multi = pretrain_multi(specs, mixed, codec, cfg, log);
  PretrainOutcome out{std::move(multi.nets[0]), std::move(multi.nets[1]),
                      std::move(multi.val_traces[0]),
                      std::move(multi.val_traces[1]), multi.best_epochs[0],
                      multi.best_epochs[1], multi.baseline_val_nmse};
  return out;
}

}  // namespace lasco::harness
