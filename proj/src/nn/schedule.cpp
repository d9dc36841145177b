#include "lasco/nn/schedule.hpp"

#include <cmath>

#include "lasco/common.hpp"

namespace lasco::nn {

LrSchedule LrSchedule::warmup_cosine(double lr_init, double lr_peak,
                                     double lr_final, int64_t warmup_steps,
                                     int64_t total_steps) {
  LASCO_CHECK(total_steps >= 1, "schedule needs total_steps >= 1");
  LASCO_CHECK(warmup_steps >= 0 && warmup_steps <= total_steps,
              "warmup_steps out of range");
  LrSchedule s;
  s.kind = Kind::kWarmupCosine;
  s.lr_init = lr_init;
  s.lr_peak = lr_peak;
  s.lr_final = lr_final;
  s.warmup_steps = warmup_steps;
  s.total_steps = total_steps;
  return s;
}

LrSchedule LrSchedule::constant(double lr) {
  LrSchedule s;
  s.kind = Kind::kConstant;
  s.lr_peak = lr;
  return s;
}

double LrSchedule::at(int64_t step) const {
  if (kind == Kind::kConstant) {
    LASCO_CHECK(step >= 0, "schedule step out of range");
    return lr_peak;
  }
  LASCO_CHECK(step >= 0 && step <= total_steps, "schedule step out of range");
  if (step < warmup_steps) {
    const double f = static_cast<double>(step) / static_cast<double>(warmup_steps);
    return lr_init + (lr_peak - lr_init) * f;
  }
  if (total_steps == warmup_steps) return lr_peak;
  const double f = static_cast<double>(step - warmup_steps) /
                   static_cast<double>(total_steps - warmup_steps);
  const double c = 0.5 * (1.0 + std::cos(3.14159265358979323846 * f));
  return lr_final + (lr_peak - lr_final) * c;
}

}  // namespace lasco::nn
