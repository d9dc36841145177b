#include <limits>

#include "lasco/harness/harness.hpp"

namespace lasco::harness {

StopScan scan_trace(std::span<const double> trace, int patience) {
  LASCO_CHECK(patience >= 1, "patience must be >= 1");
  StopScan s;
  double best = std::numeric_limits<double>::infinity();
  int wait = 0;
  for (size_t i = 0; i < trace.size(); ++i) {
    const int epoch = static_cast<int>(i) + 1;
    if (trace[i] < best) {
      best = trace[i];
      s.best_epoch = epoch;
      wait = 0;
    } else {
      ++wait;
    }
    if (wait >= patience) {
      s.stop_epoch = epoch;
      s.censored = false;
      return s;
    }
  }
  s.stop_epoch = static_cast<int>(trace.size());
  s.censored = true;
  return s;
}

bool EarlyStopMonitor::observe(double val) {
  ++epoch_;
  if (!has_best_ || val < best_) {
    has_best_ = true;
    best_ = val;
    best_epoch_ = epoch_;
    wait_ = 0;
    improved_ = true;
  } else {
    ++wait_;
    improved_ = false;
  }
  return wait_ >= patience_;
}

}  // namespace lasco::harness
