#pragma once

#include <cstring>
#include <string>
#include <unordered_map>
#include <vector>

#include "lasco/nn/tensor.hpp"

namespace lasco::nn {

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;  // allocated lazily, same shape as value
  bool trainable = true;
  // decoupled weight decay applies to matrices only (set at creation)
  bool decay = true;

  void ensure_grad() {
    if (grad.size() != value.size()) grad.resize(value.shape);
  }
};

// Named parameters with stable insertion order.
template <typename T>
class ParameterSet {
 public:
  Param<T>& add(const std::string& name, std::vector<int64_t> shape,
                bool trainable = true) {
    LASCO_CHECK(index_.find(name) == index_.end(),
                "duplicate parameter name: " + name);
    index_[name] = items_.size();
    items_.push_back(Param<T>{name, Tensor<T>(std::move(shape)), Tensor<T>{},
                              trainable, false});
    Param<T>& p = items_.back();
    p.decay = p.value.ndim() >= 2;
    return p;
  }

  bool has(const std::string& name) const {
    return index_.find(name) != index_.end();
  }

  Param<T>& at(const std::string& name) {
    auto it = index_.find(name);
    LASCO_CHECK(it != index_.end(), "unknown parameter: " + name);
    return items_[it->second];
  }
  const Param<T>& at(const std::string& name) const {
    auto it = index_.find(name);
    LASCO_CHECK(it != index_.end(), "unknown parameter: " + name);
    return items_[it->second];
  }

  std::vector<Param<T>>& items() { return items_; }
  const std::vector<Param<T>>& items() const { return items_; }
  size_t count() const { return items_.size(); }

  int64_t param_count() const {
    int64_t n = 0;
    for (const auto& p : items_) n += p.value.size();
    return n;
  }

  void zero_grads() {
    for (auto& p : items_)
      if (p.trainable) {
        p.ensure_grad();
        p.grad.zero();
      }
  }

  void set_trainable(bool t) {
    for (auto& p : items_) p.trainable = t;
  }

  bool all_frozen() const {
    for (const auto& p : items_)
      if (p.trainable) return false;
    return true;
  }

  // FNV-1a over names and raw value bytes, in insertion order. Used to prove
  // that frozen models stayed frozen.
  uint64_t content_hash() const {
    uint64_t h = 1469598103934665603ull;
    const auto mix_bytes = [&h](const void* data, size_t n) {
      const auto* b = static_cast<const unsigned char*>(data);
      for (size_t i = 0; i < n; ++i) {
        h ^= b[i];
        h *= 1099511628211ull;
      }
    };
    for (const auto& p : items_) {
      mix_bytes(p.name.data(), p.name.size());
      mix_bytes(p.value.v.data(), p.value.v.size() * sizeof(T));
    }
    return h;
  }

 private:
  std::vector<Param<T>> items_;
  std::unordered_map<std::string, size_t> index_;
};

}  // namespace lasco::nn
