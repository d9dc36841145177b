#include "lasco/collab/collab.hpp"

namespace lasco::collab {

template <typename T>
AdaptBatchLoss<T> adapt_batch_loss(const ModeSpec& mode,
                                   const nn::Tensor<T>& h_true,
                                   const nn::Tensor<T>* y_base,
                                   const nn::Tensor<T>& y_pxy,
                                   const nn::Tensor<T>* y_ref, double alpha) {
  LASCO_CHECK(variant_trains_proxy(mode.variant),
              "mode has no trainable proxy");
  AdaptBatchLoss<T> out;
  out.combined = mode_combine(mode, y_base, y_pxy, y_ref, alpha);
  LASCO_CHECK_SHAPE(out.combined.same_shape(h_true), "loss: shape mismatch");

  const int64_t batch = h_true.dim(0);
  const int64_t n = h_true.size();
  const double inv_b = 1.0 / static_cast<double>(batch);

  out.d_pxy.resize(h_true.shape);
  // d combined / d pxy is 1 except under the legacy scaled-shift law
  const bool legacy_scaled =
      mode.legacy17 &&
      (mode.variant == Variant::kLasco || mode.variant == Variant::kElasco);
  const double pxy_coef = legacy_scaled ? alpha : 1.0;

  double loss = 0.0;
  double d_alpha = 0.0;
  const bool wants_alpha =
      (mode.variant == Variant::kLasco || mode.variant == Variant::kElasco);
  for (int64_t i = 0; i < n; ++i) {
    const double r = static_cast<double>(out.combined.v[static_cast<size_t>(i)]) -
                     static_cast<double>(h_true.v[static_cast<size_t>(i)]);
    loss += r * r;
    const double d = 2.0 * r * inv_b;
    out.d_pxy.v[static_cast<size_t>(i)] = static_cast<T>(d * pxy_coef);
    if (wants_alpha) {
      const double dir =
          mode.legacy17
              ? static_cast<double>(y_pxy.v[static_cast<size_t>(i)]) -
                    static_cast<double>(y_ref->v[static_cast<size_t>(i)])
              : static_cast<double>(y_base->v[static_cast<size_t>(i)]) -
                    static_cast<double>(y_ref->v[static_cast<size_t>(i)]);
      d_alpha += d * dir;
    }
  }
  out.loss = loss * inv_b;
  out.d_alpha = d_alpha;
  return out;
}

namespace {

template <typename T>
void check_frozen(const models::ReconNet<T>& m, const char* which) {
  if (!m.frozen())
    throw Error(std::string(which) + " model must be frozen for this loss");
}

template <typename T>
double run_joint_loss(const ModeSpec& mode, const nn::Tensor<T>& h_true,
                      const nn::Tensor<T>& h_in, const models::ReconNet<T>& base,
                      models::ReconNet<T>& pxy, const models::ReconNet<T>& ref,
                      double alpha, double* d_alpha_out) {
  check_frozen(base, "base");
  check_frozen(ref, "reference");
  const nn::Tensor<T> y_base = base.forward(h_in);
  const nn::Tensor<T> y_ref = ref.forward(h_in);
  typename models::ReconNet<T>::Cache cache;
  const nn::Tensor<T> y_pxy = pxy.forward_cached(h_in, cache);

  const auto bl = adapt_batch_loss(mode, h_true, &y_base, y_pxy, &y_ref, alpha);
  pxy.backward(cache, bl.d_pxy);
  if (d_alpha_out) *d_alpha_out = bl.d_alpha;
  return bl.loss;
}

}  // namespace

template <typename T>
double loss_l1(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_in_tokens,
               const models::ReconNet<T>& base, models::ReconNet<T>& pxy,
               const models::ReconNet<T>& ref) {
  // base + pxy - ref: the scaled-shift law at alpha = 1
  ModeSpec mode{Variant::kLasco, 1.0, true};
  return run_joint_loss(mode, h_true, h_in_tokens, base, pxy, ref, 1.0,
                        nullptr);
}

template <typename T>
double loss_adapt(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_in_tokens,
                  const models::ReconNet<T>& base, models::ReconNet<T>& pxy,
                  const models::ReconNet<T>& ref, const AlphaParam& alpha,
                  double* d_alpha) {
  ModeSpec mode{alpha.learnable ? Variant::kElasco : Variant::kLasco,
                alpha.value, false};
  return run_joint_loss(mode, h_true, h_in_tokens, base, pxy, ref, alpha.value,
                        alpha.learnable ? d_alpha : nullptr);
}

#define LASCO_INSTANTIATE(T)                                                  \
  template AdaptBatchLoss<T> adapt_batch_loss<T>(                             \
      const ModeSpec&, const nn::Tensor<T>&, const nn::Tensor<T>*,            \
      const nn::Tensor<T>&, const nn::Tensor<T>*, double);                    \
  template double loss_l1<T>(const nn::Tensor<T>&, const nn::Tensor<T>&,      \
                             const models::ReconNet<T>&, models::ReconNet<T>&,\
                             const models::ReconNet<T>&);                     \
  template double loss_adapt<T>(const nn::Tensor<T>&, const nn::Tensor<T>&,   \
                                const models::ReconNet<T>&,                   \
                                models::ReconNet<T>&,                         \
                                const models::ReconNet<T>&, const AlphaParam&,\
                                double*);

LASCO_INSTANTIATE(float)
LASCO_INSTANTIATE(double)
#undef LASCO_INSTANTIATE

}  // namespace lasco::collab
