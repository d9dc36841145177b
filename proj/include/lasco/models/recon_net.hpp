#pragma once

#include <string>
#include <vector>

#include "lasco/nn/layers.hpp"
#include "lasco/nn/params.hpp"

namespace lasco::models {

using nn::NormPlacement;

// Reconstruction network shape. The channel matrix enters as one token per
// subcarrier (seq_len = n_sc) with the stacked real/imag antenna values as
// features (input_dim = 2*n_tx).
struct ModelConfig {
  int depth = 2;
  int d_model = 32;
  int d_ff = 128;
  int n_heads = 2;
  NormPlacement norm = NormPlacement::kPost;
  int input_dim = 16;
  int seq_len = 8;

  bool operator==(const ModelConfig&) const = default;
  void validate() const;
};

enum class ModelRole { kBase, kReference, kProxy, kStandalone };

const char* role_name(ModelRole r);
ModelRole role_from_name(const std::string& s);

// Linear embed -> learned positional embedding -> transformer blocks ->
// (final norm for pre-norm stacks) -> linear head back to token features.
template <typename T>
class ReconNet {
 public:
  ReconNet(const ModelConfig& cfg, uint64_t init_seed);
  ReconNet(const ModelConfig& cfg, nn::ParameterSet<T> params);

  const ModelConfig& config() const { return cfg_; }
  nn::ParameterSet<T>& params() { return ps_; }
  const nn::ParameterSet<T>& params() const { return ps_; }
  int64_t param_count() const { return ps_.param_count(); }
  uint64_t param_hash() const { return ps_.content_hash(); }

  ModelRole role = ModelRole::kStandalone;
  bool frozen() const { return ps_.all_frozen(); }
  void freeze() { ps_.set_trainable(false); }

  struct Cache {
    nn::DenseCache<T> embed;
    std::vector<nn::BlockCache<T>> blocks;
    nn::LayerNormCache<T> final_ln;
    nn::DenseCache<T> head;
  };

  // x: [batch, seq_len, input_dim] -> same shape
  nn::Tensor<T> forward(const nn::Tensor<T>& x) const;
  nn::Tensor<T> forward_cached(const nn::Tensor<T>& x, Cache& cache) const;

  // Accumulates parameter gradients (trainable params only get their grad
  // buffers touched); optionally returns dL/dx.
  void backward(const Cache& cache, const nn::Tensor<T>& dy,
                nn::Tensor<T>* dx = nullptr);

  ReconNet clone() const { return *this; }

 private:
  nn::Tensor<T> run(const nn::Tensor<T>& x, Cache* cache) const;
  nn::BlockWeights<T> block_weights(int i) const;
  nn::BlockGrads<T> block_grads(int i);

  ModelConfig cfg_;
  nn::ParameterSet<T> ps_;
};

// Closed-form parameter count for a config (tested against the built model).
int64_t expected_param_count(const ModelConfig& cfg);

using ReconNetF = ReconNet<float>;
using ReconNetD = ReconNet<double>;

}  // namespace lasco::models
