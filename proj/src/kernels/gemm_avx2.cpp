#include "lasco/kernels/kernels.hpp"
#include "lasco/kernels/thread_pool.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace lasco::kernels {

namespace {

// ROWS x 32 microkernel: 4 ymm accumulators per row, A broadcast down the
// k loop, B streamed 32 columns at a time.
template <int ROWS>
inline void mk_rows_x32(const float* a, int64_t lda, const float* b,
                        int64_t ldb, float* c, int64_t ldc, int64_t K,
                        bool accumulate) {
  __m256 acc[ROWS][4];
  for (int r = 0; r < ROWS; ++r) {
    if (accumulate) {
      acc[r][0] = _mm256_loadu_ps(c + r * ldc + 0);
      acc[r][1] = _mm256_loadu_ps(c + r * ldc + 8);
      acc[r][2] = _mm256_loadu_ps(c + r * ldc + 16);
      acc[r][3] = _mm256_loadu_ps(c + r * ldc + 24);
    } else {
      acc[r][0] = acc[r][1] = acc[r][2] = acc[r][3] = _mm256_setzero_ps();
    }
  }
  for (int64_t kk = 0; kk < K; ++kk) {
    const float* brow = b + kk * ldb;
    const __m256 b0 = _mm256_loadu_ps(brow + 0);
    const __m256 b1 = _mm256_loadu_ps(brow + 8);
    const __m256 b2 = _mm256_loadu_ps(brow + 16);
    const __m256 b3 = _mm256_loadu_ps(brow + 24);
    for (int r = 0; r < ROWS; ++r) {
      const __m256 av = _mm256_set1_ps(a[r * lda + kk]);
      acc[r][0] = _mm256_fmadd_ps(av, b0, acc[r][0]);
      acc[r][1] = _mm256_fmadd_ps(av, b1, acc[r][1]);
      acc[r][2] = _mm256_fmadd_ps(av, b2, acc[r][2]);
      acc[r][3] = _mm256_fmadd_ps(av, b3, acc[r][3]);
    }
  }
  for (int r = 0; r < ROWS; ++r) {
    _mm256_storeu_ps(c + r * ldc + 0, acc[r][0]);
    _mm256_storeu_ps(c + r * ldc + 8, acc[r][1]);
    _mm256_storeu_ps(c + r * ldc + 16, acc[r][2]);
    _mm256_storeu_ps(c + r * ldc + 24, acc[r][3]);
  }
}

template <int ROWS>
inline void mk_rows_x8(const float* a, int64_t lda, const float* b,
                       int64_t ldb, float* c, int64_t ldc, int64_t K,
                       bool accumulate) {
  __m256 acc[ROWS];
  for (int r = 0; r < ROWS; ++r)
    acc[r] = accumulate ? _mm256_loadu_ps(c + r * ldc) : _mm256_setzero_ps();
  for (int64_t kk = 0; kk < K; ++kk) {
    const __m256 bv = _mm256_loadu_ps(b + kk * ldb);
    for (int r = 0; r < ROWS; ++r)
      acc[r] = _mm256_fmadd_ps(_mm256_set1_ps(a[r * lda + kk]), bv, acc[r]);
  }
  for (int r = 0; r < ROWS; ++r) _mm256_storeu_ps(c + r * ldc, acc[r]);
}

template <int ROWS>
inline void mk_rows_tail(const float* a, int64_t lda, const float* b,
                         int64_t ldb, float* c, int64_t ldc, int64_t K,
                         int64_t cols, bool accumulate) {
  for (int r = 0; r < ROWS; ++r) {
    for (int64_t j = 0; j < cols; ++j) {
      float s = accumulate ? c[r * ldc + j] : 0.0f;
      for (int64_t kk = 0; kk < K; ++kk) s += a[r * lda + kk] * b[kk * ldb + j];
      c[r * ldc + j] = s;
    }
  }
}

template <int ROWS>
void gemm_rows(const float* a, int64_t lda, const float* b, int64_t ldb,
               float* c, int64_t ldc, int64_t K, int64_t n, bool accumulate) {
  int64_t j = 0;
  for (; j + 32 <= n; j += 32)
    mk_rows_x32<ROWS>(a, lda, b + j, ldb, c + j, ldc, K, accumulate);
  for (; j + 8 <= n; j += 8)
    mk_rows_x8<ROWS>(a, lda, b + j, ldb, c + j, ldc, K, accumulate);
  if (j < n)
    mk_rows_tail<ROWS>(a, lda, b + j, ldb, c + j, ldc, K, n - j, accumulate);
}

}  // namespace

void gemm_f32_avx2(int64_t m, int64_t k, int64_t n, const float* a,
                   const float* b, float* c, bool accumulate) {
  const int64_t row_blocks = (m + 3) / 4;
  parallel_for(row_blocks, [&](int64_t blk_b, int64_t blk_e) {
    for (int64_t blk = blk_b; blk < blk_e; ++blk) {
      const int64_t i = blk * 4;
      const int rows = static_cast<int>(m - i < 4 ? m - i : 4);
      const float* arow = a + i * k;
      float* crow = c + i * n;
      switch (rows) {
        case 4: gemm_rows<4>(arow, k, b, n, crow, n, k, n, accumulate); break;
        case 3: gemm_rows<3>(arow, k, b, n, crow, n, k, n, accumulate); break;
        case 2: gemm_rows<2>(arow, k, b, n, crow, n, k, n, accumulate); break;
        default: gemm_rows<1>(arow, k, b, n, crow, n, k, n, accumulate); break;
      }
    }
  });
}

}  // namespace lasco::kernels

#else  // non-x86 build: AVX2 lane never selected, keep the symbol

namespace lasco::kernels {
void gemm_f32_avx2(int64_t m, int64_t k, int64_t n, const float* a,
                   const float* b, float* c, bool accumulate) {
  gemm_f32_scalar(m, k, n, a, b, c, accumulate);
}
}  // namespace lasco::kernels

#endif
