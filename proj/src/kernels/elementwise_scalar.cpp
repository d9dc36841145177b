#include <cmath>

#include "lasco/kernels/dispatch.hpp"
#include "lasco/kernels/kernels.hpp"
#include "lasco/kernels/thread_pool.hpp"

namespace lasco::kernels {

namespace {

constexpr double kGeluAlpha = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluBeta = 0.044715;

template <typename T>
inline T gelu_one(T x) {
  const T u = T(kGeluAlpha) * (x + T(kGeluBeta) * x * x * x);
  return T(0.5) * x * (T(1) + std::tanh(u));
}

template <typename T>
inline T gelu_grad_one(T x) {
  const T u = T(kGeluAlpha) * (x + T(kGeluBeta) * x * x * x);
  const T t = std::tanh(u);
  const T du = T(kGeluAlpha) * (T(1) + T(3) * T(kGeluBeta) * x * x);
  return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * du;
}

template <typename T>
void softmax_rows_ref(int64_t rows, int64_t cols, T* x) {
  parallel_for(rows, [&](int64_t rb, int64_t re) {
    for (int64_t r = rb; r < re; ++r) {
      T* row = x + r * cols;
      T mx = row[0];
      for (int64_t j = 1; j < cols; ++j) mx = row[j] > mx ? row[j] : mx;
      T sum = T(0);
      for (int64_t j = 0; j < cols; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      for (int64_t j = 0; j < cols; ++j) row[j] /= sum;
    }
  });
}

template <typename T>
void adamw_ref(int64_t n, T* p, const T* g, T* m, T* v, T lr, T beta1, T beta2,
               T eps, T wd, T bc1, T bc2) {
  const T omb1 = T(1) - beta1;
  const T omb2 = T(1) - beta2;
  for (int64_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + omb1 * g[i];
    v[i] = beta2 * v[i] + omb2 * (g[i] * g[i]);
    const T mhat = m[i] / bc1;
    const T vhat = v[i] / bc2;
    p[i] = p[i] - lr * (mhat / (std::sqrt(vhat) + eps) + wd * p[i]);
  }
}

}  // namespace

void gelu_f32_scalar(int64_t n, const float* x, float* y) {
  for (int64_t i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

void gelu_grad_f32_scalar(int64_t n, const float* x, const float* dy,
                          float* dx) {
  for (int64_t i = 0; i < n; ++i) dx[i] = dy[i] * gelu_grad_one(x[i]);
}

void softmax_rows_f32_scalar(int64_t rows, int64_t cols, float* x) {
  softmax_rows_ref(rows, cols, x);
}

void adamw_f32_scalar(int64_t n, float* p, const float* g, float* m, float* v,
                      float lr, float beta1, float beta2, float eps, float wd,
                      float bc1, float bc2) {
  adamw_ref(n, p, g, m, v, lr, beta1, beta2, eps, wd, bc1, bc2);
}

void add_f32_scalar(int64_t n, const float* a, const float* b, float* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void axpy_f32_scalar(int64_t n, float alpha, const float* x, float* y) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// ---- dispatched float32 entry points ----

void gelu(int64_t n, const float* x, float* y) {
  if (active_isa() == Isa::kAvx2)
    gelu_f32_avx2(n, x, y);
  else
    gelu_f32_scalar(n, x, y);
}

void gelu_grad(int64_t n, const float* x, const float* dy, float* dx) {
  if (active_isa() == Isa::kAvx2)
    gelu_grad_f32_avx2(n, x, dy, dx);
  else
    gelu_grad_f32_scalar(n, x, dy, dx);
}

void softmax_rows(int64_t rows, int64_t cols, float* x) {
  if (active_isa() == Isa::kAvx2)
    softmax_rows_f32_avx2(rows, cols, x);
  else
    softmax_rows_f32_scalar(rows, cols, x);
}

void adamw_update(int64_t n, float* p, const float* g, float* m, float* v,
                  float lr, float beta1, float beta2, float eps, float wd,
                  float bc1, float bc2) {
  if (active_isa() == Isa::kAvx2)
    adamw_f32_avx2(n, p, g, m, v, lr, beta1, beta2, eps, wd, bc1, bc2);
  else
    adamw_f32_scalar(n, p, g, m, v, lr, beta1, beta2, eps, wd, bc1, bc2);
}

void add(int64_t n, const float* a, const float* b, float* out) {
  if (active_isa() == Isa::kAvx2)
    add_f32_avx2(n, a, b, out);
  else
    add_f32_scalar(n, a, b, out);
}

void axpy(int64_t n, float alpha, const float* x, float* y) {
  if (active_isa() == Isa::kAvx2)
    axpy_f32_avx2(n, alpha, x, y);
  else
    axpy_f32_scalar(n, alpha, x, y);
}

void scale(int64_t n, float alpha, float* x) {
  for (int64_t i = 0; i < n; ++i) x[i] *= alpha;
}

// ---- float64 verification lane (always scalar) ----

void gelu(int64_t n, const double* x, double* y) {
  for (int64_t i = 0; i < n; ++i) y[i] = gelu_one(x[i]);
}

void gelu_grad(int64_t n, const double* x, const double* dy, double* dx) {
  for (int64_t i = 0; i < n; ++i) dx[i] = dy[i] * gelu_grad_one(x[i]);
}

void softmax_rows(int64_t rows, int64_t cols, double* x) {
  softmax_rows_ref(rows, cols, x);
}

void adamw_update(int64_t n, double* p, const double* g, double* m, double* v,
                  double lr, double beta1, double beta2, double eps, double wd,
                  double bc1, double bc2) {
  adamw_ref(n, p, g, m, v, lr, beta1, beta2, eps, wd, bc1, bc2);
}

void add(int64_t n, const double* a, const double* b, double* out) {
  for (int64_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void axpy(int64_t n, double alpha, const double* x, double* y) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(int64_t n, double alpha, double* x) {
  for (int64_t i = 0; i < n; ++i) x[i] *= alpha;
}

bool has_nonfinite(int64_t n, const float* x) {
  for (int64_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return true;
  return false;
}

bool has_nonfinite(int64_t n, const double* x) {
  for (int64_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return true;
  return false;
}

}  // namespace lasco::kernels
