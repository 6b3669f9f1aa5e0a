#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hsg/grpo.hpp"

namespace hsg {

struct GradCheckReport {
  int configurations = 0;   // checked (kink-adjacent draws are resampled)
  int failures = 0;
  double worst_error = 0.0; // max relative gradient discrepancy seen
  bool zero_gradient_case_ok = false;
  std::vector<std::string> failure_notes;
  bool passed() const { return failures == 0 && zero_gradient_case_ok; }
};

/// Central finite differences (step 1e-5) against the analytic toy-policy
/// gradient over random configurations: random support size, temperature,
/// logits, reference distribution, group size, actions, and advantages.
/// Configurations with an importance ratio within 1e-3 of a clip-band edge
/// are resampled (the objective is non-differentiable there). A gradient is
/// accepted when ||analytic - fd|| <= tol * max(1, ||analytic||, ||fd||).
///
/// `flip_surrogate_sign` feeds the checker a deliberately wrong gradient so
/// callers can confirm the oracle actually rejects mutations.
GradCheckReport run_gradcheck(std::uint64_t seed, int configurations, double tolerance = 1e-6,
                              bool flip_surrogate_sign = false);

}  // namespace hsg
