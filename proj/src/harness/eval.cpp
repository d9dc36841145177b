#include "lasco/harness/harness.hpp"

namespace lasco::harness {

EvalRow evaluate_fn(const ReconFn& recon, const SplitTokens& split, int n_tx,
                    int env_id, int batch_size) {
  (void)batch_size;
  const nn::TensorF y_hat = recon(split.x);
  LASCO_CHECK_SHAPE(y_hat.same_shape(split.y), "evaluate: output shape");
  EvalRow row;
  row.env_id = env_id;
  row.nmse = collab::batch_nmse(split.y, y_hat);
  row.nmse_db = collab::to_db(row.nmse);
  row.gcs = collab::batch_gcs(split.y, y_hat, n_tx);
  return row;
}

EvalRow evaluate_mode(const collab::ModeSpec& mode,
                      const models::ReconNetF* base,
                      const models::ReconNetF* proxy,
                      const models::ReconNetF* ref, double alpha,
                      const SplitTokens& split, int n_tx, int env_id,
                      int batch_size) {
  const ReconFn recon = [&](const nn::TensorF& x) {
    std::optional<nn::TensorF> y_base, y_ref;
    if (collab::variant_uses_base(mode.variant)) {
      LASCO_CHECK(base, "mode requires the base model");
      y_base = batched_forward(*base, x, batch_size);
    }
    if (collab::variant_uses_ref(mode.variant)) {
      LASCO_CHECK(ref, "mode requires the reference model");
      y_ref = batched_forward(*ref, x, batch_size);
    }
    nn::TensorF y_pxy;
    if (mode.variant == collab::Variant::kPretrainedLam) {
      y_pxy = *y_base;  // combine is the identity on the base output
    } else {
      LASCO_CHECK(proxy, "mode requires the proxy/SAM model");
      y_pxy = batched_forward(*proxy, x, batch_size);
    }
    return collab::mode_combine(mode, y_base ? &*y_base : nullptr, y_pxy,
                                y_ref ? &*y_ref : nullptr, alpha);
  };
  return evaluate_fn(recon, split, n_tx, env_id, batch_size);
}

void EvalReport::finalize() {
  double n = 0.0, g = 0.0;
  for (const auto& r : rows) {
    n += r.nmse;
    g += r.gcs;
  }
  const double cnt = rows.empty() ? 1.0 : static_cast<double>(rows.size());
  mean_nmse = n / cnt;
  mean_nmse_db = collab::to_db(mean_nmse);
  mean_gcs = g / cnt;
}

}  // namespace lasco::harness
