#include "lasco/nn/rng.hpp"

#include <cmath>

#include "lasco/common.hpp"

namespace lasco::nn {

int Rng::uniform_int(int lo, int hi) {
  LASCO_CHECK(hi >= lo, "uniform_int: empty range");
  return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0,1]
  const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

double Rng::trunc_normal(double stddev) {
  for (;;) {
    const double z = normal();
    if (std::abs(z) <= 2.0) return z * stddev;
  }
}

double Rng::exponential(double mean) {
  const double u = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  return -mean * std::log(u);
}

double Rng::laplace(double b) {
  const double u = uniform() - 0.5;
  const double s = u < 0 ? -1.0 : 1.0;
  return -b * s * std::log(1.0 - 2.0 * std::abs(u));
}

uint64_t Rng::below(uint64_t n) {
  LASCO_CHECK(n > 0, "below(0)");
  const uint64_t limit = ~uint64_t{0} - (~uint64_t{0} % n);
  for (;;) {
    const uint64_t x = gen_();
    if (x < limit) return x % n;
  }
}

uint64_t derive_seed(uint64_t base, std::string_view tag, uint64_t a,
                     uint64_t b) {
  uint64_t h = 1469598103934665603ull;  // FNV offset basis
  const auto mix = [&h](uint64_t x) {
    for (int i = 0; i < 8; ++i) {
      h ^= (x >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(base);
  for (const char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  mix(a);
  mix(b);
  // final avalanche (splitmix64 tail)
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ull;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebull;
  h ^= h >> 31;
  return h;
}

}  // namespace lasco::nn
