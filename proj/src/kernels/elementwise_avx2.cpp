#include <cmath>

#include "lasco/kernels/kernels.hpp"
#include "lasco/kernels/thread_pool.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace lasco::kernels {

namespace {

// Cephes-style single precision exp, ~1 ulp over the clamped range.
inline __m256 exp256_ps(__m256 x) {
  const __m256 hi = _mm256_set1_ps(88.3762626647949f);
  const __m256 lo = _mm256_set1_ps(-88.3762626647949f);
  x = _mm256_min_ps(_mm256_max_ps(x, lo), hi);

  __m256 fx = _mm256_mul_ps(x, _mm256_set1_ps(1.44269504088896341f));
  fx = _mm256_round_ps(fx, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);

  __m256 z = _mm256_fnmadd_ps(fx, _mm256_set1_ps(0.693359375f), x);
  z = _mm256_fnmadd_ps(fx, _mm256_set1_ps(-2.12194440e-4f), z);
  const __m256 zz = _mm256_mul_ps(z, z);

  __m256 p = _mm256_set1_ps(1.9875691500e-4f);
  p = _mm256_fmadd_ps(p, z, _mm256_set1_ps(1.3981999507e-3f));
  p = _mm256_fmadd_ps(p, z, _mm256_set1_ps(8.3334519073e-3f));
  p = _mm256_fmadd_ps(p, z, _mm256_set1_ps(4.1665795894e-2f));
  p = _mm256_fmadd_ps(p, z, _mm256_set1_ps(1.6666665459e-1f));
  p = _mm256_fmadd_ps(p, z, _mm256_set1_ps(5.0000001201e-1f));
  p = _mm256_fmadd_ps(p, zz, z);
  p = _mm256_add_ps(p, _mm256_set1_ps(1.0f));

  const __m256i n = _mm256_add_epi32(_mm256_cvtps_epi32(fx),
                                     _mm256_set1_epi32(0x7f));
  const __m256 pow2n = _mm256_castsi256_ps(_mm256_slli_epi32(n, 23));
  return _mm256_mul_ps(p, pow2n);
}

inline __m256 tanh256_ps(__m256 x) {
  // tanh(x) = (e^{2x} - 1) / (e^{2x} + 1); exp clamp keeps this stable.
  const __m256 e = exp256_ps(_mm256_mul_ps(x, _mm256_set1_ps(2.0f)));
  const __m256 one = _mm256_set1_ps(1.0f);
  return _mm256_div_ps(_mm256_sub_ps(e, one), _mm256_add_ps(e, one));
}

constexpr float kGeluAlphaF = 0.79788456080286540f;
constexpr float kGeluBetaF = 0.044715f;

inline __m256 gelu8(__m256 x) {
  const __m256 x2 = _mm256_mul_ps(x, x);
  const __m256 inner = _mm256_fmadd_ps(_mm256_set1_ps(kGeluBetaF),
                                       _mm256_mul_ps(x2, x), x);
  const __m256 t = tanh256_ps(_mm256_mul_ps(_mm256_set1_ps(kGeluAlphaF), inner));
  return _mm256_mul_ps(_mm256_mul_ps(_mm256_set1_ps(0.5f), x),
                       _mm256_add_ps(_mm256_set1_ps(1.0f), t));
}

inline __m256 gelu_grad8(__m256 x) {
  const __m256 one = _mm256_set1_ps(1.0f);
  const __m256 half = _mm256_set1_ps(0.5f);
  const __m256 x2 = _mm256_mul_ps(x, x);
  const __m256 inner = _mm256_fmadd_ps(_mm256_set1_ps(kGeluBetaF),
                                       _mm256_mul_ps(x2, x), x);
  const __m256 t = tanh256_ps(_mm256_mul_ps(_mm256_set1_ps(kGeluAlphaF), inner));
  const __m256 du = _mm256_mul_ps(
      _mm256_set1_ps(kGeluAlphaF),
      _mm256_fmadd_ps(_mm256_set1_ps(3.0f * kGeluBetaF), x2, one));
  const __m256 sech2 = _mm256_fnmadd_ps(t, t, one);
  return _mm256_fmadd_ps(
      _mm256_mul_ps(_mm256_mul_ps(half, x), sech2), du,
      _mm256_mul_ps(half, _mm256_add_ps(one, t)));
}

inline float hmax8(__m256 v) {
  __m128 a = _mm_max_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  a = _mm_max_ps(a, _mm_movehl_ps(a, a));
  a = _mm_max_ss(a, _mm_shuffle_ps(a, a, 1));
  return _mm_cvtss_f32(a);
}

inline float hsum8(__m256 v) {
  __m128 a = _mm_add_ps(_mm256_castps256_ps128(v), _mm256_extractf128_ps(v, 1));
  a = _mm_add_ps(a, _mm_movehl_ps(a, a));
  a = _mm_add_ss(a, _mm_shuffle_ps(a, a, 1));
  return _mm_cvtss_f32(a);
}

}  // namespace

void gelu_f32_avx2(int64_t n, const float* x, float* y) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(y + i, gelu8(_mm256_loadu_ps(x + i)));
  if (i < n) {
    float bx[8] = {0}, by[8];
    for (int64_t j = i; j < n; ++j) bx[j - i] = x[j];
    _mm256_storeu_ps(by, gelu8(_mm256_loadu_ps(bx)));
    for (int64_t j = i; j < n; ++j) y[j] = by[j - i];
  }
}

void gelu_grad_f32_avx2(int64_t n, const float* x, const float* dy, float* dx) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 g = gelu_grad8(_mm256_loadu_ps(x + i));
    _mm256_storeu_ps(dx + i, _mm256_mul_ps(_mm256_loadu_ps(dy + i), g));
  }
  if (i < n) {
    float bx[8] = {0}, bdy[8] = {0}, bdx[8];
    for (int64_t j = i; j < n; ++j) {
      bx[j - i] = x[j];
      bdy[j - i] = dy[j];
    }
    const __m256 g = gelu_grad8(_mm256_loadu_ps(bx));
    _mm256_storeu_ps(bdx, _mm256_mul_ps(_mm256_loadu_ps(bdy), g));
    for (int64_t j = i; j < n; ++j) dx[j] = bdx[j - i];
  }
}

void softmax_rows_f32_avx2(int64_t rows, int64_t cols, float* x) {
  parallel_for(rows, [&](int64_t rb, int64_t re) {
    for (int64_t r = rb; r < re; ++r) {
      float* row = x + r * cols;
      float mx = row[0];
      int64_t j = 0;
      if (cols >= 8) {
        __m256 vm = _mm256_loadu_ps(row);
        for (j = 8; j + 8 <= cols; j += 8)
          vm = _mm256_max_ps(vm, _mm256_loadu_ps(row + j));
        mx = hmax8(vm);
      }
      for (; j < cols; ++j) mx = row[j] > mx ? row[j] : mx;

      float sum = 0.0f;
      const __m256 vmx = _mm256_set1_ps(mx);
      __m256 vs = _mm256_setzero_ps();
      for (j = 0; j + 8 <= cols; j += 8) {
        const __m256 e = exp256_ps(_mm256_sub_ps(_mm256_loadu_ps(row + j), vmx));
        _mm256_storeu_ps(row + j, e);
        vs = _mm256_add_ps(vs, e);
      }
      sum = hsum8(vs);
      for (; j < cols; ++j) {
        row[j] = std::exp(row[j] - mx);
        sum += row[j];
      }
      const __m256 vsum = _mm256_set1_ps(sum);
      for (j = 0; j + 8 <= cols; j += 8)
        _mm256_storeu_ps(row + j,
                         _mm256_div_ps(_mm256_loadu_ps(row + j), vsum));
      for (; j < cols; ++j) row[j] /= sum;
    }
  });
}

void adamw_f32_avx2(int64_t n, float* p, const float* g, float* m, float* v,
                    float lr, float beta1, float beta2, float eps, float wd,
                    float bc1, float bc2) {
  const __m256 vb1 = _mm256_set1_ps(beta1);
  const __m256 vomb1 = _mm256_set1_ps(1.0f - beta1);
  const __m256 vb2 = _mm256_set1_ps(beta2);
  const __m256 vomb2 = _mm256_set1_ps(1.0f - beta2);
  const __m256 vbc1 = _mm256_set1_ps(bc1);
  const __m256 vbc2 = _mm256_set1_ps(bc2);
  const __m256 veps = _mm256_set1_ps(eps);
  const __m256 vlr = _mm256_set1_ps(lr);
  const __m256 vwd = _mm256_set1_ps(wd);
  int64_t i = 0;
  // mul/add kept un-fused so this lane matches the scalar lane bit for bit
  for (; i + 8 <= n; i += 8) {
    const __m256 gv = _mm256_loadu_ps(g + i);
    __m256 mv = _mm256_loadu_ps(m + i);
    __m256 vv = _mm256_loadu_ps(v + i);
    mv = _mm256_add_ps(_mm256_mul_ps(vb1, mv), _mm256_mul_ps(vomb1, gv));
    vv = _mm256_add_ps(_mm256_mul_ps(vb2, vv),
                       _mm256_mul_ps(vomb2, _mm256_mul_ps(gv, gv)));
    _mm256_storeu_ps(m + i, mv);
    _mm256_storeu_ps(v + i, vv);
    const __m256 mhat = _mm256_div_ps(mv, vbc1);
    const __m256 vhat = _mm256_div_ps(vv, vbc2);
    const __m256 den = _mm256_add_ps(_mm256_sqrt_ps(vhat), veps);
    __m256 pv = _mm256_loadu_ps(p + i);
    const __m256 upd = _mm256_add_ps(_mm256_div_ps(mhat, den),
                                     _mm256_mul_ps(vwd, pv));
    pv = _mm256_sub_ps(pv, _mm256_mul_ps(vlr, upd));
    _mm256_storeu_ps(p + i, pv);
  }
  if (i < n)
    adamw_f32_scalar(n - i, p + i, g + i, m + i, v + i, lr, beta1, beta2, eps,
                     wd, bc1, bc2);
}

void add_f32_avx2(int64_t n, const float* a, const float* b, float* out) {
  int64_t i = 0;
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(out + i,
                     _mm256_add_ps(_mm256_loadu_ps(a + i), _mm256_loadu_ps(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void axpy_f32_avx2(int64_t n, float alpha, const float* x, float* y) {
  const __m256 va = _mm256_set1_ps(alpha);
  int64_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 yv = _mm256_add_ps(
        _mm256_mul_ps(va, _mm256_loadu_ps(x + i)), _mm256_loadu_ps(y + i));
    _mm256_storeu_ps(y + i, yv);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace lasco::kernels

#else  // non-x86 build: AVX2 lane never selected, forward to scalar

namespace lasco::kernels {
void gelu_f32_avx2(int64_t n, const float* x, float* y) {
  gelu_f32_scalar(n, x, y);
}
void gelu_grad_f32_avx2(int64_t n, const float* x, const float* dy, float* dx) {
  gelu_grad_f32_scalar(n, x, dy, dx);
}
void softmax_rows_f32_avx2(int64_t rows, int64_t cols, float* x) {
  softmax_rows_f32_scalar(rows, cols, x);
}
void adamw_f32_avx2(int64_t n, float* p, const float* g, float* m, float* v,
                    float lr, float beta1, float beta2, float eps, float wd,
                    float bc1, float bc2) {
  adamw_f32_scalar(n, p, g, m, v, lr, beta1, beta2, eps, wd, bc1, bc2);
}
void add_f32_avx2(int64_t n, const float* a, const float* b, float* out) {
  add_f32_scalar(n, a, b, out);
}
void axpy_f32_avx2(int64_t n, float alpha, const float* x, float* y) {
  axpy_f32_scalar(n, alpha, x, y);
}
}  // namespace lasco::kernels

#endif
