#pragma once

#include <cstdint>

namespace lasco::nn {

// Per-step learning rate. Warmup-cosine: linear lr_init -> lr_peak over
// warmup_steps, then cosine decay to lr_final at total_steps.
struct LrSchedule {
  enum class Kind { kWarmupCosine, kConstant };

  Kind kind = Kind::kConstant;
  double lr_init = 0.0;
  double lr_peak = 1e-3;
  double lr_final = 1e-5;
  int64_t warmup_steps = 0;
  int64_t total_steps = 0;

  static LrSchedule warmup_cosine(double lr_init, double lr_peak,
                                  double lr_final, int64_t warmup_steps,
                                  int64_t total_steps);
  static LrSchedule constant(double lr);

  // step in [0, total_steps]; throws outside that range
  double at(int64_t step) const;
};

}  // namespace lasco::nn
