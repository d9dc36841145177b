#pragma once

#include <vector>

#include "lasco/nn/params.hpp"

namespace lasco::nn {

// Decoupled weight decay Adam. Decay is applied only to params whose decay
// flag is set (matrices); biases, norm affines and scalar collaboration
// coefficients are exempt.
template <typename T>
class AdamW {
 public:
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  explicit AdamW(const ParameterSet<T>& ps) { reset(ps); }

  void reset(const ParameterSet<T>& ps);

  // One update over every trainable parameter; throws NumericalError on
  // non-finite gradients.
  void step(ParameterSet<T>& ps, double lr);

  int64_t step_count() const { return t_; }

 private:
  int64_t t_ = 0;
  std::vector<Tensor<T>> m_, v_;
};

// Single-tensor update used by the optimizer and directly by tests.
template <typename T>
void adamw_apply(Tensor<T>& param, const Tensor<T>& grad, Tensor<T>& m,
                 Tensor<T>& v, int64_t t, double lr, double beta1, double beta2,
                 double eps, double weight_decay);

}  // namespace lasco::nn
