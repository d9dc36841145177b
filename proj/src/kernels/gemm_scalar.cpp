#include <cstring>

#include "lasco/kernels/dispatch.hpp"
#include "lasco/kernels/kernels.hpp"
#include "lasco/kernels/thread_pool.hpp"

namespace lasco::kernels {

namespace {

// Reference lane: i-k-j order so the inner loop streams one row of B.
template <typename T>
void gemm_ref(int64_t m, int64_t k, int64_t n, const T* a, const T* b, T* c,
              bool accumulate) {
  for (int64_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    if (!accumulate)
      for (int64_t j = 0; j < n; ++j) crow[j] = T(0);
    const T* arow = a + i * k;
    for (int64_t kk = 0; kk < k; ++kk) {
      const T aik = arow[kk];
      const T* brow = b + kk * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

}  // namespace

void gemm_f32_scalar(int64_t m, int64_t k, int64_t n, const float* a,
                     const float* b, float* c, bool accumulate) {
  gemm_ref(m, k, n, a, b, c, accumulate);
}

void gemm(int64_t m, int64_t k, int64_t n, const float* a, const float* b,
          float* c, bool accumulate) {
  if (active_isa() == Isa::kAvx2) {
    gemm_f32_avx2(m, k, n, a, b, c, accumulate);
  } else {
    gemm_f32_scalar(m, k, n, a, b, c, accumulate);
  }
}

void gemm(int64_t m, int64_t k, int64_t n, const double* a, const double* b,
          double* c, bool accumulate) {
  gemm_ref(m, k, n, a, b, c, accumulate);
}

}  // namespace lasco::kernels
