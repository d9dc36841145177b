#pragma once

#include <cstdint>

namespace lasco::kernels {

// Instruction-set lanes. The scalar lane is the reference implementation;
// the AVX2 lane is selected at runtime on x86 hosts that report AVX2+FMA.
enum class Isa { kScalar, kAvx2 };

const char* isa_name(Isa isa);

// Best lane supported by this CPU.
Isa detect_best_isa();

// Lane used by the float32 kernels. Defaults to detect_best_isa(), or to the
// LASCO_ISA environment variable ("scalar" | "avx2") when set.
Isa active_isa();

// Test hook. Throws if the requested lane is not supported on this CPU.
void set_active_isa(Isa isa);

// Worker threads used by parallel kernels. Defaults to the hardware
// concurrency, or LASCO_THREADS when set. Results are identical for any
// thread count: work is partitioned so each output element is written by
// exactly one thread with a serial inner reduction.
int thread_count();
void set_thread_count(int n);

}  // namespace lasco::kernels
