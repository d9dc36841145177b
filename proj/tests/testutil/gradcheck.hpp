#pragma once

// Central finite-difference gradient oracle (float64). Used by the unit
// tests and the acceptance suite; intentionally independent of the layer
// backward implementations it checks.

#include <cmath>
#include <functional>
#include <vector>

#include "lasco/nn/rng.hpp"
#include "lasco/nn/tensor.hpp"

namespace testutil {

using lasco::nn::Tensor;
using lasco::nn::TensorD;

// Max relative error between analytic and finite-difference gradients of
// loss(theta) over the entries of theta. The denominator is floored at a
// fraction of the largest gradient component so that entries drowned in
// central-difference roundoff do not dominate the report.
inline double fd_check(std::vector<double*> params,
                       const std::function<double()>& loss,
                       const std::vector<double>& analytic, double h = 1e-5) {
  std::vector<double> fd(params.size());
  double global = 1e-8;
  for (size_t i = 0; i < params.size(); ++i) {
    double* p = params[i];
    const double saved = *p;
    *p = saved + h;
    const double up = loss();
    *p = saved - h;
    const double down = loss();
    *p = saved;
    fd[i] = (up - down) / (2.0 * h);
    global = std::max({global, std::abs(fd[i]), std::abs(analytic[i])});
  }
  double worst = 0.0;
  for (size_t i = 0; i < params.size(); ++i) {
    const double scale =
        std::max({std::abs(fd[i]), std::abs(analytic[i]), 1e-4 * global});
    worst = std::max(worst, std::abs(fd[i] - analytic[i]) / scale);
  }
  return worst;
}

// flattens every entry of a set of tensors into pointer + analytic-grad lists
struct FdProblem {
  std::vector<double*> params;
  std::vector<const double*> grads;

  void add(TensorD& value, const TensorD& grad) {
    for (int64_t i = 0; i < value.size(); ++i) {
      params.push_back(value.data() + i);
      grads.push_back(grad.data() + i);
    }
  }

  double run(const std::function<double()>& loss, double h = 1e-5) const {
    std::vector<double> analytic(grads.size());
    for (size_t i = 0; i < grads.size(); ++i) analytic[i] = *grads[i];
    return fd_check(params, loss, analytic, h);
  }
};

inline TensorD random_tensor(std::vector<int64_t> shape, uint64_t seed,
                             double scale = 1.0) {
  lasco::nn::Rng rng(seed);
  TensorD t(std::move(shape));
  for (auto& x : t.v) x = rng.normal(0.0, scale);
  return t;
}

}  // namespace testutil
