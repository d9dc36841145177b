#include "lasco/nn/layers.hpp"

#include <cmath>
#include <vector>

#include "lasco/kernels/kernels.hpp"
#include "lasco/kernels/thread_pool.hpp"

namespace lasco::nn {

namespace {

std::vector<int64_t> with_last(const std::vector<int64_t>& shape, int64_t d) {
  auto s = shape;
  s.back() = d;
  return s;
}

}  // namespace

template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                   Tensor<T>& y, DenseCache<T>* cache) {
  const int64_t rows = x.rows2d();
  const int64_t in = x.cols2d();
  LASCO_CHECK_SHAPE(w.ndim() == 2 && w.dim(0) == in, "dense: weight shape");
  const int64_t out = w.dim(1);
  LASCO_CHECK_SHAPE(b.size() == out, "dense: bias shape");
  const auto yshape = with_last(x.shape, out);
  if (y.shape != yshape) y.resize(yshape);
  kernels::gemm(rows, in, out, x.data(), w.data(), y.data(), false);
  for (int64_t r = 0; r < rows; ++r)
    kernels::add(out, y.data() + r * out, b.data(), y.data() + r * out);
  if (cache) cache->x = x;
}

template <typename T>
void dense_backward(const DenseCache<T>& cache, const Tensor<T>& w,
                    const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>& dw,
                    Tensor<T>& db, bool accumulate_dx) {
  const Tensor<T>& x = cache.x;
  const int64_t rows = x.rows2d();
  const int64_t in = x.cols2d();
  const int64_t out = w.dim(1);
  LASCO_CHECK_SHAPE(dy.rows2d() == rows && dy.cols2d() == out,
                    "dense backward: dy shape");
  if (dx) {
    std::vector<T> wt(static_cast<size_t>(in * out));
    kernels::transpose(w.data(), wt.data(), in, out);
    if (!accumulate_dx && !dx->same_shape(x)) dx->resize(x.shape);
    kernels::gemm(rows, out, in, dy.data(), wt.data(), dx->data(),
                  accumulate_dx);
  }
  std::vector<T> xt(static_cast<size_t>(rows * in));
  kernels::transpose(x.data(), xt.data(), rows, in);
  kernels::gemm(in, rows, out, xt.data(), dy.data(), dw.data(), true);
  for (int64_t r = 0; r < rows; ++r)
    kernels::add(out, db.data(), dy.data() + r * out, db.data());
}

template <typename T>
void layer_norm_forward(const Tensor<T>& x, const Tensor<T>& gamma,
                        const Tensor<T>& beta, double eps, Tensor<T>& y,
                        LayerNormCache<T>* cache) {
  const int64_t rows = x.rows2d();
  const int64_t d = x.cols2d();
  LASCO_CHECK_SHAPE(gamma.size() == d && beta.size() == d, "layer_norm: affine shape");
  if (!y.same_shape(x)) y.resize(x.shape);
  if (cache) {
    if (!cache->xhat.same_shape(x)) cache->xhat.resize(x.shape);
    if (cache->inv_std.size() != rows) cache->inv_std.resize({rows});
  }
  kernels::parallel_for(rows, [&](int64_t rb, int64_t re) {
    for (int64_t r = rb; r < re; ++r) {
      const T* xr = x.data() + r * d;
      T* yr = y.data() + r * d;
      T mean = T(0);
      for (int64_t j = 0; j < d; ++j) mean += xr[j];
      mean /= static_cast<T>(d);
      T var = T(0);
      for (int64_t j = 0; j < d; ++j) {
        const T c = xr[j] - mean;
        var += c * c;
      }
      var /= static_cast<T>(d);
      const T inv = T(1) / std::sqrt(var + static_cast<T>(eps));
      T* xh = cache ? cache->xhat.data() + r * d : nullptr;
      for (int64_t j = 0; j < d; ++j) {
        const T h = (xr[j] - mean) * inv;
        if (xh) xh[j] = h;
        yr[j] = gamma.v[static_cast<size_t>(j)] * h + beta.v[static_cast<size_t>(j)];
      }
      if (cache) cache->inv_std.v[static_cast<size_t>(r)] = inv;
    }
  });
}

template <typename T>
void layer_norm_backward(const LayerNormCache<T>& cache, const Tensor<T>& gamma,
                         const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dgamma,
                         Tensor<T>& dbeta) {
  const int64_t rows = cache.xhat.rows2d();
  const int64_t d = cache.xhat.cols2d();
  LASCO_CHECK_SHAPE(dy.rows2d() == rows && dy.cols2d() == d, "layer_norm backward: dy");
  if (!dx.same_shape(dy)) dx.resize(dy.shape);
  kernels::parallel_for(rows, [&](int64_t rb, int64_t re) {
    for (int64_t r = rb; r < re; ++r) {
      const T* dyr = dy.data() + r * d;
      const T* xh = cache.xhat.data() + r * d;
      T* dxr = dx.data() + r * d;
      const T inv = cache.inv_std.v[static_cast<size_t>(r)];
      T a = T(0), c = T(0);
      for (int64_t j = 0; j < d; ++j) {
        const T dh = dyr[j] * gamma.v[static_cast<size_t>(j)];
        a += dh;
        c += dh * xh[j];
      }
      a /= static_cast<T>(d);
      c /= static_cast<T>(d);
      for (int64_t j = 0; j < d; ++j) {
        const T dh = dyr[j] * gamma.v[static_cast<size_t>(j)];
        dxr[j] = inv * (dh - a - xh[j] * c);
      }
    }
  });
  // affine grads accumulate across rows; serial keeps the order fixed
  for (int64_t r = 0; r < rows; ++r) {
    const T* dyr = dy.data() + r * d;
    const T* xh = cache.xhat.data() + r * d;
    for (int64_t j = 0; j < d; ++j) {
      dgamma.v[static_cast<size_t>(j)] += dyr[j] * xh[j];
      dbeta.v[static_cast<size_t>(j)] += dyr[j];
    }
  }
}

template <typename T>
void gelu_forward(const Tensor<T>& x, Tensor<T>& y, GeluCache<T>* cache) {
  if (!y.same_shape(x)) y.resize(x.shape);
  kernels::gelu(x.size(), x.data(), y.data());
  if (cache) cache->x = x;
}

template <typename T>
void gelu_backward(const GeluCache<T>& cache, const Tensor<T>& dy,
                   Tensor<T>& dx) {
  LASCO_CHECK_SHAPE(dy.size() == cache.x.size(), "gelu backward: dy shape");
  if (!dx.same_shape(dy)) dx.resize(dy.shape);
  kernels::gelu_grad(dy.size(), cache.x.data(), dy.data(), dx.data());
}

template <typename T>
void mha_forward(const Tensor<T>& x, const AttnWeights<T>& w, int n_heads,
                 Tensor<T>& y, AttnCache<T>* cache) {
  LASCO_CHECK_SHAPE(x.ndim() == 3, "attention expects [batch, seq, d_model]");
  const int64_t batch = x.dim(0), seq = x.dim(1), d = x.dim(2);
  LASCO_CHECK_SHAPE(d % n_heads == 0, "d_model not divisible by n_heads");
  const int64_t dh = d / n_heads;
  const T scl = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dh)));

  AttnCache<T> local;
  AttnCache<T>& c = cache ? *cache : local;
  DenseCache<T>* const no_cache = nullptr;
  dense_forward(x, *w.wq, *w.bq, c.q, no_cache);
  dense_forward(x, *w.wk, *w.bk, c.k, no_cache);
  dense_forward(x, *w.wv, *w.bv, c.v, no_cache);
  c.in_cache.x = x;

  if (c.probs.shape != std::vector<int64_t>{batch, n_heads, seq, seq})
    c.probs.resize({batch, n_heads, seq, seq});
  T* probs = c.probs.data();
  const T* q = c.q.data();
  const T* k = c.k.data();
  const T* v = c.v.data();

  kernels::parallel_for(batch, [&](int64_t bb, int64_t be) {
    for (int64_t b = bb; b < be; ++b) {
      for (int64_t h = 0; h < n_heads; ++h) {
        T* p = probs + ((b * n_heads + h) * seq) * seq;
        for (int64_t s = 0; s < seq; ++s) {
          const T* qrow = q + (b * seq + s) * d + h * dh;
          for (int64_t t = 0; t < seq; ++t) {
            const T* krow = k + (b * seq + t) * d + h * dh;
            T acc = T(0);
            for (int64_t j = 0; j < dh; ++j) acc += qrow[j] * krow[j];
            p[s * seq + t] = acc * scl;
          }
        }
      }
    }
  });
  kernels::softmax_rows(batch * n_heads * seq, seq, probs);

  Tensor<T> ctx(x.shape);
  T* cx = ctx.data();
  kernels::parallel_for(batch, [&](int64_t bb, int64_t be) {
    for (int64_t b = bb; b < be; ++b) {
      for (int64_t h = 0; h < n_heads; ++h) {
        const T* p = probs + ((b * n_heads + h) * seq) * seq;
        for (int64_t s = 0; s < seq; ++s) {
          T* orow = cx + (b * seq + s) * d + h * dh;
          for (int64_t j = 0; j < dh; ++j) orow[j] = T(0);
          for (int64_t t = 0; t < seq; ++t) {
            const T pst = p[s * seq + t];
            const T* vrow = v + (b * seq + t) * d + h * dh;
            for (int64_t j = 0; j < dh; ++j) orow[j] += pst * vrow[j];
          }
        }
      }
    }
  });
  dense_forward(ctx, *w.wo, *w.bo, y, cache ? &c.out_cache : nullptr);
}

template <typename T>
void mha_backward(const AttnCache<T>& cache, const AttnWeights<T>& w,
                  const AttnGrads<T>& g, int n_heads, const Tensor<T>& dy,
                  Tensor<T>& dx) {
  const Tensor<T>& x = cache.in_cache.x;
  const int64_t batch = x.dim(0), seq = x.dim(1), d = x.dim(2);
  const int64_t dh = d / n_heads;
  const T scl = T(1) / static_cast<T>(std::sqrt(static_cast<double>(dh)));

  Tensor<T> dctx;
  dense_backward(cache.out_cache, *w.wo, dy, &dctx, *g.wo, *g.bo, false);

  Tensor<T> dq(x.shape), dk(x.shape), dv(x.shape);
  const T* q = cache.q.data();
  const T* k = cache.k.data();
  const T* v = cache.v.data();
  const T* probs = cache.probs.data();
  const T* dcx = dctx.data();

  kernels::parallel_for(batch, [&](int64_t bb, int64_t be) {
    std::vector<T> dp(static_cast<size_t>(seq * seq));
    std::vector<T> ds(static_cast<size_t>(seq * seq));
    for (int64_t b = bb; b < be; ++b) {
      for (int64_t h = 0; h < n_heads; ++h) {
        const T* p = probs + ((b * n_heads + h) * seq) * seq;
        // dP = dctx * V^T ; dV += P^T * dctx
        for (int64_t s = 0; s < seq; ++s) {
          const T* drow = dcx + (b * seq + s) * d + h * dh;
          for (int64_t t = 0; t < seq; ++t) {
            const T* vrow = v + (b * seq + t) * d + h * dh;
            T acc = T(0);
            for (int64_t j = 0; j < dh; ++j) acc += drow[j] * vrow[j];
            dp[static_cast<size_t>(s * seq + t)] = acc;
          }
        }
        for (int64_t t = 0; t < seq; ++t) {
          T* dvrow = dv.data() + (b * seq + t) * d + h * dh;
          for (int64_t s = 0; s < seq; ++s) {
            const T pst = p[s * seq + t];
            const T* drow = dcx + (b * seq + s) * d + h * dh;
            for (int64_t j = 0; j < dh; ++j) dvrow[j] += pst * drow[j];
          }
        }
        // softmax backward, then scale
        for (int64_t s = 0; s < seq; ++s) {
          T dot = T(0);
          for (int64_t t = 0; t < seq; ++t)
            dot += dp[static_cast<size_t>(s * seq + t)] * p[s * seq + t];
          for (int64_t t = 0; t < seq; ++t)
            ds[static_cast<size_t>(s * seq + t)] =
                (dp[static_cast<size_t>(s * seq + t)] - dot) * p[s * seq + t] * scl;
        }
        // dQ += dS * K ; dK += dS^T * Q
        for (int64_t s = 0; s < seq; ++s) {
          T* dqrow = dq.data() + (b * seq + s) * d + h * dh;
          for (int64_t t = 0; t < seq; ++t) {
            const T dst = ds[static_cast<size_t>(s * seq + t)];
            const T* krow = k + (b * seq + t) * d + h * dh;
            for (int64_t j = 0; j < dh; ++j) dqrow[j] += dst * krow[j];
          }
        }
        for (int64_t t = 0; t < seq; ++t) {
          T* dkrow = dk.data() + (b * seq + t) * d + h * dh;
          for (int64_t s = 0; s < seq; ++s) {
            const T dst = ds[static_cast<size_t>(s * seq + t)];
            const T* qrow = q + (b * seq + s) * d + h * dh;
            for (int64_t j = 0; j < dh; ++j) dkrow[j] += dst * qrow[j];
          }
        }
      }
    }
  });

  // project back through q/k/v, accumulating into dx
  dense_backward(cache.in_cache, *w.wq, dq, &dx, *g.wq, *g.bq, false);
  dense_backward(cache.in_cache, *w.wk, dk, &dx, *g.wk, *g.bk, true);
  dense_backward(cache.in_cache, *w.wv, dv, &dx, *g.wv, *g.bv, true);
}

template <typename T>
void block_forward(const Tensor<T>& x, const BlockWeights<T>& w, int n_heads,
                   NormPlacement placement, double ln_eps, Tensor<T>& y,
                   BlockCache<T>* cache) {
  BlockCache<T> local;
  BlockCache<T>& c = cache ? *cache : local;
  Tensor<T> tmp, attn_out, h, gact, f;
  if (placement == NormPlacement::kPre) {
    layer_norm_forward(x, *w.ln1_g, *w.ln1_b, ln_eps, tmp, &c.ln1);
    mha_forward(tmp, w.attn, n_heads, attn_out, &c.attn);
    Tensor<T> r1(x.shape);
    kernels::add(x.size(), x.data(), attn_out.data(), r1.data());
    layer_norm_forward(r1, *w.ln2_g, *w.ln2_b, ln_eps, tmp, &c.ln2);
    dense_forward(tmp, *w.w1, *w.b1, h, &c.ff1);
    gelu_forward(h, gact, &c.gelu);
    dense_forward(gact, *w.w2, *w.b2, f, &c.ff2);
    if (!y.same_shape(x)) y.resize(x.shape);
    kernels::add(x.size(), r1.data(), f.data(), y.data());
  } else {
    mha_forward(x, w.attn, n_heads, attn_out, &c.attn);
    Tensor<T> s1(x.shape);
    kernels::add(x.size(), x.data(), attn_out.data(), s1.data());
    Tensor<T> r1;
    layer_norm_forward(s1, *w.ln1_g, *w.ln1_b, ln_eps, r1, &c.ln1);
    dense_forward(r1, *w.w1, *w.b1, h, &c.ff1);
    gelu_forward(h, gact, &c.gelu);
    dense_forward(gact, *w.w2, *w.b2, f, &c.ff2);
    Tensor<T> s2(x.shape);
    kernels::add(x.size(), r1.data(), f.data(), s2.data());
    layer_norm_forward(s2, *w.ln2_g, *w.ln2_b, ln_eps, y, &c.ln2);
  }
}

template <typename T>
void block_backward(const BlockCache<T>& cache, const BlockWeights<T>& w,
                    const BlockGrads<T>& g, int n_heads,
                    NormPlacement placement, const Tensor<T>& dy,
                    Tensor<T>& dx) {
  Tensor<T> dgact, dh, dn2, dattn_in, dr1;
  if (placement == NormPlacement::kPre) {
    // y = r1 + f
    dense_backward(cache.ff2, *w.w2, dy, &dgact, *g.w2, *g.b2, false);
    gelu_backward(cache.gelu, dgact, dh);
    dense_backward(cache.ff1, *w.w1, dh, &dn2, *g.w1, *g.b1, false);
    Tensor<T> dr1_ln;
    layer_norm_backward(cache.ln2, *w.ln2_g, dn2, dr1_ln, *g.ln2_g, *g.ln2_b);
    dr1.resize(dy.shape);
    kernels::add(dy.size(), dy.data(), dr1_ln.data(), dr1.data());
    // r1 = x + attn(ln1(x))
    Tensor<T> dn1;
    mha_backward(cache.attn, w.attn, g.attn, n_heads, dr1, dn1);
    Tensor<T> dx_ln;
    layer_norm_backward(cache.ln1, *w.ln1_g, dn1, dx_ln, *g.ln1_g, *g.ln1_b);
    if (!dx.same_shape(dy)) dx.resize(dy.shape);
    kernels::add(dy.size(), dr1.data(), dx_ln.data(), dx.data());
  } else {
    // y = ln2(r1 + f)
    Tensor<T> ds2;
    layer_norm_backward(cache.ln2, *w.ln2_g, dy, ds2, *g.ln2_g, *g.ln2_b);
    dense_backward(cache.ff2, *w.w2, ds2, &dgact, *g.w2, *g.b2, false);
    gelu_backward(cache.gelu, dgact, dh);
    Tensor<T> dr1_f;
    dense_backward(cache.ff1, *w.w1, dh, &dr1_f, *g.w1, *g.b1, false);
    dr1.resize(dy.shape);
    kernels::add(dy.size(), ds2.data(), dr1_f.data(), dr1.data());
    // r1 = ln1(x + attn(x))
    Tensor<T> ds1;
    layer_norm_backward(cache.ln1, *w.ln1_g, dr1, ds1, *g.ln1_g, *g.ln1_b);
    Tensor<T> dx_attn;
    mha_backward(cache.attn, w.attn, g.attn, n_heads, ds1, dx_attn);
    if (!dx.same_shape(dy)) dx.resize(dy.shape);
    kernels::add(dy.size(), ds1.data(), dx_attn.data(), dx.data());
  }
}

#define LASCO_INSTANTIATE(T)                                                   \
  template void dense_forward<T>(const Tensor<T>&, const Tensor<T>&,           \
                                 const Tensor<T>&, Tensor<T>&, DenseCache<T>*);\
  template void dense_backward<T>(const DenseCache<T>&, const Tensor<T>&,      \
                                  const Tensor<T>&, Tensor<T>*, Tensor<T>&,    \
                                  Tensor<T>&, bool);                           \
  template void layer_norm_forward<T>(const Tensor<T>&, const Tensor<T>&,      \
                                      const Tensor<T>&, double, Tensor<T>&,    \
                                      LayerNormCache<T>*);                     \
  template void layer_norm_backward<T>(const LayerNormCache<T>&,               \
                                       const Tensor<T>&, const Tensor<T>&,     \
                                       Tensor<T>&, Tensor<T>&, Tensor<T>&);    \
  template void gelu_forward<T>(const Tensor<T>&, Tensor<T>&, GeluCache<T>*);  \
  template void gelu_backward<T>(const GeluCache<T>&, const Tensor<T>&,        \
                                 Tensor<T>&);                                  \
  template void mha_forward<T>(const Tensor<T>&, const AttnWeights<T>&, int,   \
                               Tensor<T>&, AttnCache<T>*);                     \
  template void mha_backward<T>(const AttnCache<T>&, const AttnWeights<T>&,    \
                                const AttnGrads<T>&, int, const Tensor<T>&,    \
                                Tensor<T>&);                                   \
  template void block_forward<T>(const Tensor<T>&, const BlockWeights<T>&,     \
                                 int, NormPlacement, double, Tensor<T>&,       \
                                 BlockCache<T>*);                              \
  template void block_backward<T>(const BlockCache<T>&, const BlockWeights<T>&,\
                                  const BlockGrads<T>&, int, NormPlacement,    \
                                  const Tensor<T>&, Tensor<T>&);

LASCO_INSTANTIATE(float)
LASCO_INSTANTIATE(double)
#undef LASCO_INSTANTIATE

}  // namespace lasco::nn
