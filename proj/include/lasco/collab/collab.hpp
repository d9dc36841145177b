#pragma once

#include <span>
#include <string>

#include "lasco/models/recon_net.hpp"
#include "lasco/nn/tensor.hpp"

namespace lasco::collab {

// ---- combine laws ----
//
// The modified law is evaluated as alpha*base + (pxy - alpha*ref) so that the
// limits are exact in float arithmetic: alpha=0 returns pxy bit for bit, and
// pxy==ref with alpha=1 returns base bit for bit. combine_lasco is the
// alpha=1 instance of the same kernel.

template <typename T>
void combine_modified(const nn::Tensor<T>& y_base, const nn::Tensor<T>& y_pxy,
                      const nn::Tensor<T>& y_ref, double alpha,
                      nn::Tensor<T>& out);

template <typename T>
void combine_lasco(const nn::Tensor<T>& y_base, const nn::Tensor<T>& y_pxy,
                   const nn::Tensor<T>& y_ref, nn::Tensor<T>& out) {
  combine_modified(y_base, y_pxy, y_ref, 1.0, out);
}

// ---- metrics ----

double to_db(double linear);

// ||h_hat - h||^2 / ||h||^2 over any fixed real layout; throws on zero norm.
template <typename T>
double nmse(std::span<const T> h_true, std::span<const T> h_hat);

// Mean per-subcarrier |h_hat^H h| / (||h_hat|| ||h||) over the token layout
// [seq = subcarrier][re(0..n_tx), im(0..n_tx)]; throws on a zero column.
template <typename T>
double gcs_tokens(std::span<const T> h_true, std::span<const T> h_hat,
                  int n_tx, int n_sc);

// Same metric on the [Re column-major ; Im column-major] vectorization.
template <typename T>
double gcs_realvec(std::span<const T> h_true, std::span<const T> h_hat,
                   int n_tx, int n_sc);

// Batch means over [batch, seq, 2*n_tx] token tensors (double accumulation).
template <typename T>
double batch_nmse(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_hat);
template <typename T>
double batch_gcs(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_hat,
                 int n_tx);

// ---- collaboration modes ----

enum class Variant {
  kPretrainedLam,
  kPretrainedSam,
  kFinetunedSam,
  kBaselineA,
  kLasco,
  kElasco,
  kVariantLasco,
};

const char* variant_name(Variant v);
Variant variant_from_name(const std::string& s);
bool variant_uses_base(Variant v);
bool variant_uses_ref(Variant v);
bool variant_trains_proxy(Variant v);
bool variant_alpha_learnable(Variant v);

struct AlphaParam {
  double value = 1.0;
  bool learnable = false;
  double init_value = 1.0;
};

struct ModeSpec {
  Variant variant = Variant::kLasco;
  double alpha = 1.0;   // fixed alpha (LASCO) or the learnable init (E-LASCO)
  bool legacy17 = false;  // scale the proxy-ref shift instead of the base-ref one
};

// Inference-time combination for a mode. base/ref may be null when the mode
// does not use them.
template <typename T>
nn::Tensor<T> mode_combine(const ModeSpec& mode, const nn::Tensor<T>* y_base,
                           const nn::Tensor<T>& y_pxy,
                           const nn::Tensor<T>* y_ref, double alpha);

// ---- adaptation losses ----
//
// Batch-averaged squared error of the combined reconstruction, with the
// gradient routed to the proxy outputs only (and to alpha when learnable).

template <typename T>
struct AdaptBatchLoss {
  double loss = 0.0;
  nn::Tensor<T> combined;
  nn::Tensor<T> d_pxy;
  double d_alpha = 0.0;
};

template <typename T>
AdaptBatchLoss<T> adapt_batch_loss(const ModeSpec& mode,
                                   const nn::Tensor<T>& h_true,
                                   const nn::Tensor<T>* y_base,
                                   const nn::Tensor<T>& y_pxy,
                                   const nn::Tensor<T>* y_ref, double alpha);

// Joint-inference losses running the three models; base and ref must be
// frozen (throws otherwise). Gradients accumulate into pxy's parameters.
template <typename T>
double loss_l1(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_in_tokens,
               const models::ReconNet<T>& base, models::ReconNet<T>& pxy,
               const models::ReconNet<T>& ref);

template <typename T>
double loss_adapt(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_in_tokens,
                  const models::ReconNet<T>& base, models::ReconNet<T>& pxy,
                  const models::ReconNet<T>& ref, const AlphaParam& alpha,
                  double* d_alpha);

}  // namespace lasco::collab
