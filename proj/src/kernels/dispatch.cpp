#include "lasco/kernels/dispatch.hpp"

#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>

#include "lasco/common.hpp"

namespace lasco::kernels {

namespace {

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  if (const char* env = std::getenv("LASCO_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::kScalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_has_avx2_fma()) throw Error("LASCO_ISA=avx2 but CPU lacks AVX2+FMA");
      return Isa::kAvx2;
    }
    throw ConfigError(std::string("unknown LASCO_ISA value: ") + env);
  }
  return detect_best_isa();
}

int initial_threads() {
  if (const char* env = std::getenv("LASCO_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

Isa g_isa = initial_isa();
int g_threads = initial_threads();

}  // namespace

const char* isa_name(Isa isa) {
  return isa == Isa::kAvx2 ? "avx2" : "scalar";
}

Isa detect_best_isa() {
  return cpu_has_avx2_fma() ? Isa::kAvx2 : Isa::kScalar;
}

Isa active_isa() { return g_isa; }

void set_active_isa(Isa isa) {
  if (isa == Isa::kAvx2 && !cpu_has_avx2_fma())
    throw Error("AVX2 lane requested but CPU lacks AVX2+FMA");
  g_isa = isa;
}

int thread_count() { return g_threads; }

void set_thread_count(int n) {
  LASCO_CHECK(n >= 1, "thread count must be >= 1");
  g_threads = n;
}

}  // namespace lasco::kernels
