#pragma once

#include <cstdint>
#include <functional>

namespace lasco::kernels {

// Runs body(begin, end) over a partition of [0, n) into at most thread_count()
// contiguous chunks. The caller thread executes one chunk itself. Serial
// (inline) when n is small or thread_count() == 1, so single-thread runs and
// multi-thread runs produce bit-identical results as long as chunks only
// write disjoint outputs.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& body);

// Tears the pool down (used by tests that change the thread count).
void shutdown_pool();

}  // namespace lasco::kernels
