#pragma once

#include <cstddef>
#include <cstdint>

namespace lasco::kernels {

// Dense row-major GEMM: C[m,n] = A[m,k] * B[k,n], accumulating into C when
// accumulate is set. The float32 entry point dispatches between the scalar
// and AVX2 lanes; float64 always uses the scalar lane (verification path).
void gemm(int64_t m, int64_t k, int64_t n, const float* a, const float* b,
          float* c, bool accumulate);
void gemm(int64_t m, int64_t k, int64_t n, const double* a, const double* b,
          double* c, bool accumulate);

// Per-lane float32 implementations, exposed for equivalence tests.
void gemm_f32_scalar(int64_t m, int64_t k, int64_t n, const float* a,
                     const float* b, float* c, bool accumulate);
void gemm_f32_avx2(int64_t m, int64_t k, int64_t n, const float* a,
                   const float* b, float* c, bool accumulate);

// out[c*rows + r] = in[r*cols + c]
template <typename T>
void transpose(const T* in, T* out, int64_t rows, int64_t cols) {
  constexpr int64_t kBlock = 32;
  for (int64_t r0 = 0; r0 < rows; r0 += kBlock)
    for (int64_t c0 = 0; c0 < cols; c0 += kBlock) {
      const int64_t r1 = r0 + kBlock < rows ? r0 + kBlock : rows;
      const int64_t c1 = c0 + kBlock < cols ? c0 + kBlock : cols;
      for (int64_t r = r0; r < r1; ++r)
        for (int64_t c = c0; c < c1; ++c) out[c * rows + r] = in[r * cols + c];
    }
}

// Elementwise ops (float32 dispatched, float64 scalar).
void add(int64_t n, const float* a, const float* b, float* out);
void add(int64_t n, const double* a, const double* b, double* out);
void axpy(int64_t n, float alpha, const float* x, float* y);
void axpy(int64_t n, double alpha, const double* x, double* y);
void scale(int64_t n, float alpha, float* x);
void scale(int64_t n, double alpha, double* x);

// tanh-form GELU shared by every lane so the scalar and SIMD variants
// approximate the same function.
void gelu(int64_t n, const float* x, float* y);
void gelu(int64_t n, const double* x, double* y);
// dx = dy * gelu'(x)
void gelu_grad(int64_t n, const float* x, const float* dy, float* dx);
void gelu_grad(int64_t n, const double* x, const double* dy, double* dx);

// Row-wise softmax in place, max-subtracted.
void softmax_rows(int64_t rows, int64_t cols, float* x);
void softmax_rows(int64_t rows, int64_t cols, double* x);

// One AdamW update over a flat parameter block.
//   m = b1*m + (1-b1)*g;  v = b2*v + (1-b2)*g^2
//   p -= lr * ((m/bc1) / (sqrt(v/bc2) + eps) + wd*p)
// bc1/bc2 are the bias-correction denominators 1-b1^t and 1-b2^t.
void adamw_update(int64_t n, float* p, const float* g, float* m, float* v,
                  float lr, float beta1, float beta2, float eps, float wd,
                  float bc1, float bc2);
void adamw_update(int64_t n, double* p, const double* g, double* m, double* v,
                  double lr, double beta1, double beta2, double eps, double wd,
                  double bc1, double bc2);

// Per-lane variants for equivalence tests.
void gelu_f32_scalar(int64_t n, const float* x, float* y);
void gelu_f32_avx2(int64_t n, const float* x, float* y);
void gelu_grad_f32_scalar(int64_t n, const float* x, const float* dy, float* dx);
void gelu_grad_f32_avx2(int64_t n, const float* x, const float* dy, float* dx);
void softmax_rows_f32_scalar(int64_t rows, int64_t cols, float* x);
void softmax_rows_f32_avx2(int64_t rows, int64_t cols, float* x);
void adamw_f32_scalar(int64_t n, float* p, const float* g, float* m, float* v,
                      float lr, float beta1, float beta2, float eps, float wd,
                      float bc1, float bc2);
void adamw_f32_avx2(int64_t n, float* p, const float* g, float* m, float* v,
                    float lr, float beta1, float beta2, float eps, float wd,
                    float bc1, float bc2);
void add_f32_scalar(int64_t n, const float* a, const float* b, float* out);
void add_f32_avx2(int64_t n, const float* a, const float* b, float* out);
void axpy_f32_scalar(int64_t n, float alpha, const float* x, float* y);
void axpy_f32_avx2(int64_t n, float alpha, const float* x, float* y);

bool has_nonfinite(int64_t n, const float* x);
bool has_nonfinite(int64_t n, const double* x);

}  // namespace lasco::kernels
