#include <cmath>

#include "lasco/collab/collab.hpp"

namespace lasco::collab {

double to_db(double linear) { return 10.0 * std::log10(linear); }

template <typename T>
double nmse(std::span<const T> h_true, std::span<const T> h_hat) {
  LASCO_CHECK_SHAPE(h_true.size() == h_hat.size(), "nmse: length mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < h_true.size(); ++i) {
    const double e = static_cast<double>(h_hat[i]) - static_cast<double>(h_true[i]);
    num += e * e;
    den += static_cast<double>(h_true[i]) * static_cast<double>(h_true[i]);
  }
  if (den <= 0.0) throw Error("nmse: zero-norm reference");
  return num / den;
}

namespace {

// one subcarrier column given (re, im) pointers with unit stride
template <typename T>
double column_cosine(const T* re_t, const T* im_t, const T* re_h, const T* im_h,
                     int n_tx) {
  double dot_re = 0.0, dot_im = 0.0, nt = 0.0, nh = 0.0;
  for (int t = 0; t < n_tx; ++t) {
    const double ar = re_h[t], ai = im_h[t];  // reconstructed
    const double br = re_t[t], bi = im_t[t];  // true
    // conj(h_hat) * h
    dot_re += ar * br + ai * bi;
    dot_im += ar * bi - ai * br;
    nh += ar * ar + ai * ai;
    nt += br * br + bi * bi;
  }
  if (nt <= 0.0 || nh <= 0.0) throw Error("gcs: zero subcarrier column");
  return std::sqrt(dot_re * dot_re + dot_im * dot_im) /
         (std::sqrt(nh) * std::sqrt(nt));
}

}  // namespace

template <typename T>
double gcs_tokens(std::span<const T> h_true, std::span<const T> h_hat, int n_tx,
                  int n_sc) {
  const size_t per = static_cast<size_t>(2 * n_tx) * n_sc;
  LASCO_CHECK_SHAPE(h_true.size() == per && h_hat.size() == per,
                    "gcs: length mismatch");
  double acc = 0.0;
  for (int s = 0; s < n_sc; ++s) {
    const T* tok_t = h_true.data() + static_cast<size_t>(s) * 2 * n_tx;
    const T* tok_h = h_hat.data() + static_cast<size_t>(s) * 2 * n_tx;
    acc += column_cosine(tok_t, tok_t + n_tx, tok_h, tok_h + n_tx, n_tx);
  }
  return acc / n_sc;
}

template <typename T>
double gcs_realvec(std::span<const T> h_true, std::span<const T> h_hat,
                   int n_tx, int n_sc) {
  const size_t n = static_cast<size_t>(n_tx) * n_sc;
  LASCO_CHECK_SHAPE(h_true.size() == 2 * n && h_hat.size() == 2 * n,
                    "gcs: length mismatch");
  double acc = 0.0;
  for (int s = 0; s < n_sc; ++s) {
    const size_t off = static_cast<size_t>(s) * n_tx;
    acc += column_cosine(h_true.data() + off, h_true.data() + n + off,
                         h_hat.data() + off, h_hat.data() + n + off, n_tx);
  }
  return acc / n_sc;
}

template <typename T>
double batch_nmse(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_hat) {
  LASCO_CHECK_SHAPE(h_true.same_shape(h_hat) && h_true.ndim() == 3,
                    "batch_nmse: bad shapes");
  const int64_t batch = h_true.dim(0);
  const int64_t per = h_true.size() / batch;
  double acc = 0.0;
  for (int64_t b = 0; b < batch; ++b)
    acc += nmse(std::span<const T>(h_true.data() + b * per,
                                   static_cast<size_t>(per)),
                std::span<const T>(h_hat.data() + b * per,
                                   static_cast<size_t>(per)));
  return acc / static_cast<double>(batch);
}

template <typename T>
double batch_gcs(const nn::Tensor<T>& h_true, const nn::Tensor<T>& h_hat,
                 int n_tx) {
  LASCO_CHECK_SHAPE(h_true.same_shape(h_hat) && h_true.ndim() == 3 &&
                        h_true.dim(2) == 2 * n_tx,
                    "batch_gcs: bad shapes");
  const int64_t batch = h_true.dim(0);
  const int n_sc = static_cast<int>(h_true.dim(1));
  const int64_t per = h_true.size() / batch;
  double acc = 0.0;
  for (int64_t b = 0; b < batch; ++b)
    acc += gcs_tokens(std::span<const T>(h_true.data() + b * per,
                                         static_cast<size_t>(per)),
                      std::span<const T>(h_hat.data() + b * per,
                                         static_cast<size_t>(per)),
                      n_tx, n_sc);
  return acc / static_cast<double>(batch);
}

#define LASCO_INSTANTIATE(T)                                                \
  template double nmse<T>(std::span<const T>, std::span<const T>);          \
  template double gcs_tokens<T>(std::span<const T>, std::span<const T>, int,\
                                int);                                       \
  template double gcs_realvec<T>(std::span<const T>, std::span<const T>,    \
                                 int, int);                                 \
  template double batch_nmse<T>(const nn::Tensor<T>&, const nn::Tensor<T>&);\
  template double batch_gcs<T>(const nn::Tensor<T>&, const nn::Tensor<T>&,  \
                               int);

LASCO_INSTANTIATE(float)
LASCO_INSTANTIATE(double)
#undef LASCO_INSTANTIATE

}  // namespace lasco::collab
