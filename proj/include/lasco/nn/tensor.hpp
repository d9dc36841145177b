#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

#include "lasco/common.hpp"

namespace lasco::nn {

// Dense row-major tensor. float is the training dtype, double the
// verification dtype; the layer code is templated over both.
template <typename T>
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<T> v;

  Tensor() = default;
  explicit Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    v.assign(static_cast<size_t>(count(shape)), T(0));
  }
  Tensor(std::vector<int64_t> s, std::vector<T> data)
      : shape(std::move(s)), v(std::move(data)) {
    LASCO_CHECK_SHAPE(static_cast<int64_t>(v.size()) == count(shape),
                      "tensor data length does not match shape");
  }

  static int64_t count(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t d : s) n *= d;
    return n;
  }

  int64_t size() const { return static_cast<int64_t>(v.size()); }
  int ndim() const { return static_cast<int>(shape.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
  T* data() { return v.data(); }
  const T* data() const { return v.data(); }
  void fill(T x) { std::fill(v.begin(), v.end(), x); }
  void zero() { fill(T(0)); }

  // Number of rows when viewed as a 2-D matrix with the last axis as columns.
  int64_t rows2d() const {
    LASCO_CHECK_SHAPE(ndim() >= 1, "rows2d on rank-0 tensor");
    return size() / shape.back();
  }
  int64_t cols2d() const { return shape.back(); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }

  void resize(std::vector<int64_t> s) {
    shape = std::move(s);
    v.assign(static_cast<size_t>(count(shape)), T(0));
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.v.resize(v.size());
    for (size_t i = 0; i < v.size(); ++i) out.v[i] = static_cast<U>(v[i]);
    return out;
  }
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

}  // namespace lasco::nn
