#pragma once

#include "freeprob/core.hpp"

namespace freeprob {

struct RiccatiOptions {
  double tol = 1e-13;
  /// Largest change of the integrated variable accepted in one step.
  double max_step_change = 1e-2;
  /// Abort as soon as Im F <= 0 (the path has left the domain where F lands in C+).
  bool require_upper = false;
  long max_steps = 2000000;
};

struct RiccatiState {
  Complex F;
  Complex dF;
  double est_error = 0.0;
  long steps = 0;
  double min_im_F = 0.0;
};

// Integrates F' = omega F - F^2 - c along the segment from -> to with RK4 and
// step doubling. Near zeros of F the solver switches to G = 1/F, which obeys
// G' = 1 - omega G + c G^2, so poles of either function are stepped over.
RiccatiState riccati_integrate(double c, Complex from, Complex F_from, Complex to,
                               const RiccatiOptions& opts = {});

}  // namespace freeprob
