#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace lasco::nn {

// Deterministic RNG. All distribution transforms are hand-rolled on top of
// mt19937_64 so that a seed fully determines every draw independent of the
// standard library implementation.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // [0, 1)
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // inclusive bounds
  int uniform_int(int lo, int hi);

  // standard normal via Box-Muller (cached second value)
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // resampled until |z| <= 2 sigma
  double trunc_normal(double stddev);

  double exponential(double mean);

  // Laplace with scale b (variance 2 b^2)
  double laplace(double b);

  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (size_t i = xs.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(below(i));
      std::swap(xs[i - 1], xs[j]);
    }
  }

  // uniform in [0, n), rejection-sampled
  uint64_t below(uint64_t n);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Stable seed derivation (FNV-1a over the tag and mixing of the words).
uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a = 0,
                     uint64_t b = 0);

}  // namespace lasco::nn
