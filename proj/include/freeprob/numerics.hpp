#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "freeprob/core.hpp"

namespace freeprob::numerics {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

struct ComplexQuadResult {
  Complex value{};
  double error = 0.0;
};

// Adaptive Gauss-Kronrod on [a, b]; either end may be infinite. The interval is
// split at every breakpoint lying strictly inside it. Throws QuadratureError on a
// non-finite result, otherwise the caller inspects `error`.
QuadResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                     const std::vector<double>& breakpoints = {});

ComplexQuadResult integrate_complex(const std::function<Complex(double)>& f, double a, double b,
                                    double tol, const std::vector<double>& breakpoints = {});

/// Worker count: FREEPROB_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Work is statically striped across threads, so the
/// caller's reduction order stays fixed regardless of scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace freeprob::numerics
