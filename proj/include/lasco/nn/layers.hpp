#pragma once

#include "lasco/nn/tensor.hpp"

namespace lasco::nn {

enum class NormPlacement { kPre, kPost };

// Layers keep the activations needed by their backward pass in explicit
// cache structs; the model composes backwards in reverse order by hand.

template <typename T>
struct DenseCache {
  Tensor<T> x;  // input, flattened to [rows, in]
};

// y[rows,out] = x[rows,in] * w[in,out] + b[out]
template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                   Tensor<T>& y, DenseCache<T>* cache);

// dx (optional, accumulated when accumulate_dx), dw += x^T dy, db += colsum(dy)
template <typename T>
void dense_backward(const DenseCache<T>& cache, const Tensor<T>& w,
                    const Tensor<T>& dy, Tensor<T>* dx, Tensor<T>& dw,
                    Tensor<T>& db, bool accumulate_dx = false);

template <typename T>
struct LayerNormCache {
  Tensor<T> xhat;     // normalized input
  Tensor<T> inv_std;  // [rows]
};

template <typename T>
void layer_norm_forward(const Tensor<T>& x, const Tensor<T>& gamma,
                        const Tensor<T>& beta, double eps, Tensor<T>& y,
                        LayerNormCache<T>* cache);

template <typename T>
void layer_norm_backward(const LayerNormCache<T>& cache, const Tensor<T>& gamma,
                         const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dgamma,
                         Tensor<T>& dbeta);

template <typename T>
struct GeluCache {
  Tensor<T> x;
};

template <typename T>
void gelu_forward(const Tensor<T>& x, Tensor<T>& y, GeluCache<T>* cache);

template <typename T>
void gelu_backward(const GeluCache<T>& cache, const Tensor<T>& dy,
                   Tensor<T>& dx);

// Multi-head self-attention over x[batch, seq, d_model]; no masking, no
// positional term inside (positions are added at the embedding).
template <typename T>
struct AttnWeights {
  const Tensor<T>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
};

template <typename T>
struct AttnGrads {
  Tensor<T>*wq, *bq, *wk, *bk, *wv, *bv, *wo, *bo;
};

template <typename T>
struct AttnCache {
  DenseCache<T> in_cache;          // shared input for q/k/v projections
  Tensor<T> q, k, v;               // [batch*seq, d_model]
  Tensor<T> probs;                 // [batch, heads, seq, seq]
  DenseCache<T> out_cache;         // context fed to the output projection
};

template <typename T>
void mha_forward(const Tensor<T>& x, const AttnWeights<T>& w, int n_heads,
                 Tensor<T>& y, AttnCache<T>* cache);

template <typename T>
void mha_backward(const AttnCache<T>& cache, const AttnWeights<T>& w,
                  const AttnGrads<T>& g, int n_heads, const Tensor<T>& dy,
                  Tensor<T>& dx);

// One transformer block: attention + GELU feed-forward with residuals,
// pre-norm or post-norm.
template <typename T>
struct BlockWeights {
  const Tensor<T>*ln1_g, *ln1_b;
  AttnWeights<T> attn;
  const Tensor<T>*ln2_g, *ln2_b;
  const Tensor<T>*w1, *b1, *w2, *b2;
};

template <typename T>
struct BlockGrads {
  Tensor<T>*ln1_g, *ln1_b;
  AttnGrads<T> attn;
  Tensor<T>*ln2_g, *ln2_b;
  Tensor<T>*w1, *b1, *w2, *b2;
};

template <typename T>
struct BlockCache {
  LayerNormCache<T> ln1, ln2;
  AttnCache<T> attn;
  GeluCache<T> gelu;
  DenseCache<T> ff1, ff2;
};

template <typename T>
void block_forward(const Tensor<T>& x, const BlockWeights<T>& w, int n_heads,
                   NormPlacement placement, double ln_eps, Tensor<T>& y,
                   BlockCache<T>* cache);

template <typename T>
void block_backward(const BlockCache<T>& cache, const BlockWeights<T>& w,
                    const BlockGrads<T>& g, int n_heads,
                    NormPlacement placement, const Tensor<T>& dy,
                    Tensor<T>& dx);

}  // namespace lasco::nn
