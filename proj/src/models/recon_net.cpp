#include "lasco/models/recon_net.hpp"

#include "lasco/kernels/kernels.hpp"
#include "lasco/nn/rng.hpp"

namespace lasco::models {

namespace {
constexpr double kLnEps = 1e-5;
constexpr double kInitStd = 0.02;
}  // namespace

void ModelConfig::validate() const {
  LASCO_CHECK(depth >= 1, "model depth must be >= 1");
  LASCO_CHECK(d_model >= 1 && d_ff >= 1, "model widths must be >= 1");
  LASCO_CHECK(n_heads >= 1 && d_model % n_heads == 0,
              "d_model must be divisible by n_heads");
  LASCO_CHECK(input_dim >= 2 && seq_len >= 1, "bad token geometry");
}

const char* role_name(ModelRole r) {
  switch (r) {
    case ModelRole::kBase: return "base";
    case ModelRole::kReference: return "reference";
    case ModelRole::kProxy: return "proxy";
    default: return "standalone";
  }
}

ModelRole role_from_name(const std::string& s) {
  if (s == "base") return ModelRole::kBase;
  if (s == "reference") return ModelRole::kReference;
  if (s == "proxy") return ModelRole::kProxy;
  if (s == "standalone") return ModelRole::kStandalone;
  throw Error("unknown model role: " + s);
}

template <typename T>
ReconNet<T>::ReconNet(const ModelConfig& cfg, uint64_t init_seed) : cfg_(cfg) {
  cfg_.validate();
  const int64_t d = cfg_.d_model, f = cfg_.d_ff, in = cfg_.input_dim,
                s = cfg_.seq_len;

  const auto add_param = [&](const std::string& name,
                             std::vector<int64_t> shape, double init) {
    auto& p = ps_.add(name, std::move(shape));
    if (init > 0.0) {
      // seeded per parameter name so init is order-independent
      nn::Rng rng(nn::derive_seed(init_seed, name));
      for (auto& x : p.value.v) x = static_cast<T>(rng.trunc_normal(init));
    }
    return &p;
  };
  const auto add_ones = [&](const std::string& name, int64_t n) {
    auto& p = ps_.add(name, {n});
    p.value.fill(T(1));
  };

  add_param("embed.w", {in, d}, kInitStd);
  add_param("embed.b", {d}, 0.0);
  add_param("pos", {s, d}, kInitStd);
  for (int i = 0; i < cfg_.depth; ++i) {
    const std::string pre = "blk" + std::to_string(i) + ".";
    add_ones(pre + "ln1.g", d);
    add_param(pre + "ln1.b", {d}, 0.0);
    add_param(pre + "attn.wq", {d, d}, kInitStd);
    add_param(pre + "attn.bq", {d}, 0.0);
    add_param(pre + "attn.wk", {d, d}, kInitStd);
    add_param(pre + "attn.bk", {d}, 0.0);
    add_param(pre + "attn.wv", {d, d}, kInitStd);
    add_param(pre + "attn.bv", {d}, 0.0);
    add_param(pre + "attn.wo", {d, d}, kInitStd);
    add_param(pre + "attn.bo", {d}, 0.0);
    add_ones(pre + "ln2.g", d);
    add_param(pre + "ln2.b", {d}, 0.0);
    add_param(pre + "ffn.w1", {d, f}, kInitStd);
    add_param(pre + "ffn.b1", {f}, 0.0);
    add_param(pre + "ffn.w2", {f, d}, kInitStd);
    add_param(pre + "ffn.b2", {d}, 0.0);
  }
  if (cfg_.norm == NormPlacement::kPre) {
    add_ones("final_ln.g", d);
    add_param("final_ln.b", {d}, 0.0);
  }
  add_param("head.w", {d, in}, kInitStd);
  add_param("head.b", {in}, 0.0);
}

template <typename T>
ReconNet<T>::ReconNet(const ModelConfig& cfg, nn::ParameterSet<T> params)
    : cfg_(cfg), ps_(std::move(params)) {
  cfg_.validate();
  // proxies carry one extra scalar (the learnable collaboration coefficient)
  const int64_t expected = expected_param_count(cfg_);
  const bool ok = ps_.param_count() == expected ||
                  (ps_.has("collab.alpha") &&
                   ps_.param_count() == expected + 1);
  LASCO_CHECK(ok, "parameter set does not match model config");
}

template <typename T>
nn::BlockWeights<T> ReconNet<T>::block_weights(int i) const {
  const std::string pre = "blk" + std::to_string(i) + ".";
  nn::BlockWeights<T> w;
  w.ln1_g = &ps_.at(pre + "ln1.g").value;
  w.ln1_b = &ps_.at(pre + "ln1.b").value;
  w.attn.wq = &ps_.at(pre + "attn.wq").value;
  w.attn.bq = &ps_.at(pre + "attn.bq").value;
  w.attn.wk = &ps_.at(pre + "attn.wk").value;
  w.attn.bk = &ps_.at(pre + "attn.bk").value;
  w.attn.wv = &ps_.at(pre + "attn.wv").value;
  w.attn.bv = &ps_.at(pre + "attn.bv").value;
  w.attn.wo = &ps_.at(pre + "attn.wo").value;
  w.attn.bo = &ps_.at(pre + "attn.bo").value;
  w.ln2_g = &ps_.at(pre + "ln2.g").value;
  w.ln2_b = &ps_.at(pre + "ln2.b").value;
  w.w1 = &ps_.at(pre + "ffn.w1").value;
  w.b1 = &ps_.at(pre + "ffn.b1").value;
  w.w2 = &ps_.at(pre + "ffn.w2").value;
  w.b2 = &ps_.at(pre + "ffn.b2").value;
  return w;
}

template <typename T>
nn::BlockGrads<T> ReconNet<T>::block_grads(int i) {
  const std::string pre = "blk" + std::to_string(i) + ".";
  const auto g = [&](const std::string& n) -> nn::Tensor<T>* {
    auto& p = ps_.at(pre + n);
    p.ensure_grad();
    return &p.grad;
  };
  nn::BlockGrads<T> r;
  r.ln1_g = g("ln1.g");
  r.ln1_b = g("ln1.b");
  r.attn.wq = g("attn.wq");
  r.attn.bq = g("attn.bq");
  r.attn.wk = g("attn.wk");
  r.attn.bk = g("attn.bk");
  r.attn.wv = g("attn.wv");
  r.attn.bv = g("attn.bv");
  r.attn.wo = g("attn.wo");
  r.attn.bo = g("attn.bo");
  r.ln2_g = g("ln2.g");
  r.ln2_b = g("ln2.b");
  r.w1 = g("ffn.w1");
  r.b1 = g("ffn.b1");
  r.w2 = g("ffn.w2");
  r.b2 = g("ffn.b2");
  return r;
}

template <typename T>
nn::Tensor<T> ReconNet<T>::run(const nn::Tensor<T>& x, Cache* cache) const {
  LASCO_CHECK_SHAPE(x.ndim() == 3 && x.dim(1) == cfg_.seq_len &&
                        x.dim(2) == cfg_.input_dim,
                    "model input must be [batch, seq_len, input_dim]");
  const int64_t batch = x.dim(0);
  const int64_t s = cfg_.seq_len, d = cfg_.d_model;

  nn::Tensor<T> h;
  nn::dense_forward(x, ps_.at("embed.w").value, ps_.at("embed.b").value, h,
                    cache ? &cache->embed : nullptr);
  // learned positional embedding, broadcast over the batch
  const nn::Tensor<T>& pos = ps_.at("pos").value;
  for (int64_t b = 0; b < batch; ++b)
    kernels::add(s * d, h.data() + b * s * d, pos.data(), h.data() + b * s * d);

  if (cache) cache->blocks.resize(static_cast<size_t>(cfg_.depth));
  nn::Tensor<T> y;
  for (int i = 0; i < cfg_.depth; ++i) {
    nn::block_forward(h, block_weights(i), cfg_.n_heads, cfg_.norm, kLnEps, y,
                      cache ? &cache->blocks[static_cast<size_t>(i)] : nullptr);
    std::swap(h, y);
  }
  if (cfg_.norm == NormPlacement::kPre) {
    nn::layer_norm_forward(h, ps_.at("final_ln.g").value,
                           ps_.at("final_ln.b").value, kLnEps, y,
                           cache ? &cache->final_ln : nullptr);
    std::swap(h, y);
  }
  nn::Tensor<T> out;
  nn::dense_forward(h, ps_.at("head.w").value, ps_.at("head.b").value, out,
                    cache ? &cache->head : nullptr);
  return out;
}

template <typename T>
nn::Tensor<T> ReconNet<T>::forward(const nn::Tensor<T>& x) const {
  return run(x, nullptr);
}

template <typename T>
nn::Tensor<T> ReconNet<T>::forward_cached(const nn::Tensor<T>& x,
                                          Cache& cache) const {
  return run(x, &cache);
}

template <typename T>
void ReconNet<T>::backward(const Cache& cache, const nn::Tensor<T>& dy,
                           nn::Tensor<T>* dx) {
  const auto grad = [&](const std::string& n) -> nn::Tensor<T>& {
    auto& p = ps_.at(n);
    p.ensure_grad();
    return p.grad;
  };

  nn::Tensor<T> d_cur;
  nn::dense_backward(cache.head, ps_.at("head.w").value, dy, &d_cur,
                     grad("head.w"), grad("head.b"), false);
  if (cfg_.norm == NormPlacement::kPre) {
    nn::Tensor<T> tmp;
    nn::layer_norm_backward(cache.final_ln, ps_.at("final_ln.g").value, d_cur,
                            tmp, grad("final_ln.g"), grad("final_ln.b"));
    std::swap(d_cur, tmp);
  }
  for (int i = cfg_.depth - 1; i >= 0; --i) {
    nn::Tensor<T> tmp;
    nn::block_backward(cache.blocks[static_cast<size_t>(i)], block_weights(i),
                       block_grads(i), cfg_.n_heads, cfg_.norm, d_cur, tmp);
    std::swap(d_cur, tmp);
  }
  // positional embedding gradient: sum over the batch
  {
    const int64_t batch = d_cur.dim(0);
    const int64_t sd = static_cast<int64_t>(cfg_.seq_len) * cfg_.d_model;
    nn::Tensor<T>& dpos = grad("pos");
    for (int64_t b = 0; b < batch; ++b)
      kernels::add(sd, dpos.data(), d_cur.data() + b * sd, dpos.data());
  }
  nn::dense_backward(cache.embed, ps_.at("embed.w").value, d_cur, dx,
                     grad("embed.w"), grad("embed.b"), false);
}

int64_t expected_param_count(const ModelConfig& cfg) {
  const int64_t d = cfg.d_model, f = cfg.d_ff, in = cfg.input_dim,
                s = cfg.seq_len;
  int64_t n = in * d + d;  // embed
  n += s * d;              // positions
  int64_t per_block = 0;
  per_block += 2 * (2 * d);        // two layer norms
  per_block += 4 * (d * d + d);    // q,k,v,o projections
  per_block += d * f + f;          // ffn in
  per_block += f * d + d;          // ffn out
  n += cfg.depth * per_block;
  if (cfg.norm == NormPlacement::kPre) n += 2 * d;  // final norm
  n += d * in + in;                // head
  return n;
}

template class ReconNet<float>;
template class ReconNet<double>;

}  // namespace lasco::models
