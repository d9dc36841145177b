#include "lasco/nn/adamw.hpp"

#include <cmath>

#include "lasco/kernels/kernels.hpp"

namespace lasco::nn {

template <typename T>
void adamw_apply(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& m,
                 Tensor<T>& v, int64_t t, double lr, double beta1, double beta2,
                 double eps, double weight_decay) {
  LASCO_CHECK_SHAPE(param.size() == grad.size() && param.size() == m.size() &&
                        param.size() == v.size(),
                    "adamw: shape mismatch");
  if (kernels::has_nonfinite(grad.size(), grad.data()))
    throw NumericalError("adamw: non-finite gradient");
  const T bc1 = T(1) - static_cast<T>(std::pow(beta1, static_cast<double>(t)));
  const T bc2 = T(1) - static_cast<T>(std::pow(beta2, static_cast<double>(t)));
  kernels::adamw_update(param.size(), param.data(), grad.data(), m.data(),
                        v.data(), static_cast<T>(lr), static_cast<T>(beta1),
                        static_cast<T>(beta2), static_cast<T>(eps),
                        static_cast<T>(weight_decay), bc1, bc2);
}

template <typename T>
void AdamW<T>::reset(const ParameterSet<T>& ps) {
  t_ = 0;
  m_.clear();
  v_.clear();
  m_.reserve(ps.count());
  v_.reserve(ps.count());
  for (const auto& p : ps.items()) {
    m_.emplace_back(p.value.shape);
    v_.emplace_back(p.value.shape);
  }
}

template <typename T>
void AdamW<T>::step(ParameterSet<T>& ps, double lr) {
  LASCO_CHECK(m_.size() == ps.count(), "adamw: optimizer/param set mismatch");
  ++t_;
  for (size_t i = 0; i < ps.count(); ++i) {
    auto& p = ps.items()[i];
    if (!p.trainable) continue;
    LASCO_CHECK_SHAPE(p.grad.size() == p.value.size(),
                      "adamw: missing gradient for " + p.name);
    adamw_apply(p.value, p.grad, m_[i], v_[i], t_, lr, beta1, beta2, eps,
                p.decay ? weight_decay : 0.0);
  }
}

template void adamw_apply<float>(Tensor<float>&, const Tensor<float>&,
                                 Tensor<float>&, Tensor<float>&, int64_t,
                                 double, double, double, double, double);
template void adamw_apply<double>(Tensor<double>&, const Tensor<double>&,
                                  Tensor<double>&, Tensor<double>&, int64_t,
                                  double, double, double, double, double);
template class AdamW<float>;
template class AdamW<double>;

}  // namespace lasco::nn
