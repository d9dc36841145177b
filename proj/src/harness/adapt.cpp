#include <algorithm>
#include <cmath>

#include "lasco/harness/harness.hpp"

namespace lasco::harness {

namespace {

constexpr const char* kAlphaParam = "collab.alpha";

models::ReconNetF init_proxy(const AdaptTask& task,
                             const models::ReconNetF* base,
                             const models::ReconNetF* ref) {
  using collab::Variant;
  switch (task.mode.variant) {
    case Variant::kLasco:
    case Variant::kElasco:
    case Variant::kVariantLasco:
    case Variant::kFinetunedSam: {
      // clone of the pre-trained (reference) SAM
      LASCO_CHECK(ref, "mode requires the pre-trained SAM checkpoint");
      models::ReconNetF proxy = ref->clone();
      proxy.params().set_trainable(true);
      proxy.role = models::ModelRole::kProxy;
      return proxy;
    }
    case Variant::kBaselineA: {
      // same architecture, fresh random weights
      LASCO_CHECK(ref, "baseline-a requires the SAM architecture donor");
      models::ReconNetF proxy(
          ref->config(),
          nn::derive_seed(task.seed, "baseline-a-init",
                          static_cast<uint64_t>(task.env_id),
                          static_cast<uint64_t>(task.codeword_len)));
      proxy.role = models::ModelRole::kProxy;
      return proxy;
    }
    default:
      throw Error("mode has no adaptation step");
  }
  (void)base;
}

}  // namespace

FrozenOutputs compute_frozen_outputs(const models::ReconNetF* base,
                                     const models::ReconNetF* ref,
                                     const EnvTokens& env, int batch_size) {
  FrozenOutputs f;
  if (base) {
    f.base_train = batched_forward(*base, env.train.x, batch_size);
    f.base_val = batched_forward(*base, env.val.x, batch_size);
    f.base_test = batched_forward(*base, env.test.x, batch_size);
    f.has_base = true;
  }
  if (ref) {
    f.ref_train = batched_forward(*ref, env.train.x, batch_size);
    f.ref_val = batched_forward(*ref, env.val.x, batch_size);
    f.ref_test = batched_forward(*ref, env.test.x, batch_size);
    f.has_ref = true;
  }
  return f;
}

AdaptOutcome adapt(const AdaptTask& task, const EnvTokens& env,
                   const models::ReconNetF* base, const models::ReconNetF* ref,
                   const FrozenOutputs* frozen) {
  using collab::Variant;
  const auto& mode = task.mode;
  task.train.validate();
  LASCO_CHECK(collab::variant_trains_proxy(mode.variant),
              "mode does not adapt: " + std::string(collab::variant_name(mode.variant)));
  LASCO_CHECK(env.train.n >= 1 && env.val.n >= 1 && env.test.n >= 1,
              "adaptation needs nonempty splits");

  const bool uses_base = collab::variant_uses_base(mode.variant);
  const bool uses_ref_out = collab::variant_uses_ref(mode.variant);
  if (uses_base) {
    LASCO_CHECK(base, "mode requires the base LAM checkpoint");
    LASCO_CHECK(base->frozen(), "base LAM must be frozen");
  }
  if (uses_ref_out) {
    LASCO_CHECK(ref, "mode requires the reference SAM checkpoint");
    LASCO_CHECK(ref->frozen(), "reference SAM must be frozen");
  }
  const uint64_t base_hash = base ? base->param_hash() : 0;
  const uint64_t ref_hash = ref ? ref->param_hash() : 0;

  // training subset (seeded truncation for the sample-efficiency sweep)
  int64_t n_train = env.train.n;
  std::vector<int64_t> subset(static_cast<size_t>(n_train));
  for (int64_t i = 0; i < n_train; ++i) subset[static_cast<size_t>(i)] = i;
  if (task.train_count >= 0) {
    LASCO_CHECK(task.train_count >= 1 && task.train_count <= env.train.n,
                "train_count exceeds the train split");
    if (task.train_count < env.train.n) {
      nn::Rng trunc_rng(nn::derive_seed(task.seed, "truncate",
                                        static_cast<uint64_t>(task.env_id),
                                        static_cast<uint64_t>(task.codeword_len)));
      trunc_rng.shuffle(subset);
      subset.resize(static_cast<size_t>(task.train_count));
      n_train = task.train_count;
    }
  }

  FrozenOutputs local_frozen;
  if (!frozen && (uses_base || uses_ref_out)) {
    local_frozen = compute_frozen_outputs(uses_base ? base : nullptr,
                                          uses_ref_out ? ref : nullptr, env,
                                          task.train.batch_size);
    frozen = &local_frozen;
  }
  if (uses_base) LASCO_CHECK(frozen && frozen->has_base, "missing frozen base outputs");
  if (uses_ref_out) LASCO_CHECK(frozen && frozen->has_ref, "missing frozen reference outputs");

  models::ReconNetF proxy = init_proxy(task, base, ref);
  const bool learn_alpha = collab::variant_alpha_learnable(mode.variant);
  if (learn_alpha) {
    auto& a = proxy.params().add(kAlphaParam, {1});
    a.value.v[0] = static_cast<float>(mode.alpha);
  }
  nn::AdamW<float> opt(proxy.params());

  nn::Rng shuffle_rng(nn::derive_seed(task.seed, "adapt-shuffle",
                                      static_cast<uint64_t>(task.env_id),
                                      static_cast<uint64_t>(task.codeword_len)));

  EarlyStopMonitor monitor(task.train.patience);
  nn::ParameterSet<float> best_params = proxy.params();
  double best_alpha = mode.alpha;

  nn::TensorF xb, yb, base_b, ref_b;
  models::ReconNetF::Cache cache;
  AdaptReport report;
  report.env_id = task.env_id;
  report.mode = collab::variant_name(mode.variant);
  report.codeword_len = task.codeword_len;
  report.seed = task.seed;
  report.alpha_init = mode.alpha;
  report.n_train = n_train;

  bool stopped = false;
  std::vector<int64_t> order = subset;
  for (int epoch = 1; epoch <= task.train.max_epochs && !stopped; ++epoch) {
    shuffle_rng.shuffle(order);
    for (int64_t b0 = 0; b0 < n_train; b0 += task.train.batch_size) {
      const int64_t b1 = std::min<int64_t>(b0 + task.train.batch_size, n_train);
      const std::span<const int64_t> ids(order.data() + b0,
                                         static_cast<size_t>(b1 - b0));
      gather_rows(env.train.x, ids, xb);
      gather_rows(env.train.y, ids, yb);
      if (uses_base) gather_rows(frozen->base_train, ids, base_b);
      if (uses_ref_out) gather_rows(frozen->ref_train, ids, ref_b);

      const double alpha =
          learn_alpha ? static_cast<double>(proxy.params().at(kAlphaParam).value.v[0])
                      : mode.alpha;

      proxy.params().zero_grads();
      const nn::TensorF y_pxy = proxy.forward_cached(xb, cache);
      auto bl = collab::adapt_batch_loss(mode, yb, uses_base ? &base_b : nullptr,
                                         y_pxy, uses_ref_out ? &ref_b : nullptr,
                                         alpha);
      proxy.backward(cache, bl.d_pxy);
      if (learn_alpha)
        proxy.params().at(kAlphaParam).grad.v[0] = static_cast<float>(bl.d_alpha);
      opt.step(proxy.params(), task.train.lr_peak);
    }

    // validation under the mode's inference law
    const double alpha =
        learn_alpha ? static_cast<double>(proxy.params().at(kAlphaParam).value.v[0])
                    : mode.alpha;
    const nn::TensorF y_val = batched_forward(proxy, env.val.x, task.train.batch_size);
    const nn::TensorF combined = collab::mode_combine(
        mode, frozen && frozen->has_base ? &frozen->base_val : nullptr, y_val,
        frozen && frozen->has_ref ? &frozen->ref_val : nullptr, alpha);
    const double val_nmse = collab::batch_nmse(env.val.y, combined);
    if (!std::isfinite(val_nmse))
      throw NumericalError("adaptation diverged at epoch " + std::to_string(epoch));
    report.val_trace.push_back(val_nmse);

    stopped = monitor.observe(val_nmse);
    if (monitor.improved()) {
      best_params = proxy.params();
      best_alpha = alpha;
    }
    if (stopped) report.stop_epoch = epoch;
  }
  if (!stopped) report.stop_epoch = task.train.max_epochs;
  report.censored = !stopped;
  report.epochs_to_converge = monitor.best_epoch();
  report.alpha_final = best_alpha;

  // best-val checkpoint is what gets evaluated
  proxy.params() = std::move(best_params);

  const nn::TensorF y_test = batched_forward(proxy, env.test.x, task.train.batch_size);
  const nn::TensorF test_combined = collab::mode_combine(
      mode, frozen && frozen->has_base ? &frozen->base_test : nullptr, y_test,
      frozen && frozen->has_ref ? &frozen->ref_test : nullptr, best_alpha);
  report.test_nmse = collab::batch_nmse(env.test.y, test_combined);
  report.test_nmse_db = collab::to_db(report.test_nmse);
  report.test_gcs = collab::batch_gcs(env.test.y, test_combined, env.n_tx);

  report.frozen_ok = (!base || base->param_hash() == base_hash) &&
                     (!ref || ref->param_hash() == ref_hash);
  if (!report.frozen_ok)
    throw Error("frozen model parameters changed during adaptation");

  return AdaptOutcome{std::move(report), std::move(proxy)};
}

}  // namespace lasco::harness
