#pragma once

#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/measures.hpp"
#include "freeprob/report.hpp"
#include "freeprob/transforms.hpp"

namespace freeprob {

/// H_0 = 1, H_1 = x, H_{n+1} = x H_n - (c + n) H_{n-1}.
Rational associated_hermite_eval(unsigned n, const Rational& x, const Rational& c);
double associated_hermite_eval(unsigned n, double x, double c);

/// D_{-c}(z) from its integral representation, c > 0.
Complex parabolic_cylinder_D(double c, Complex z);

/// Density of the Askey-Wimp-Kerov law mu_c at t, c > -1.
double awk_density(double c, double t, const TransformOptions& opts = {});

MeasureSpec awk_measure(double c);

/// |F'(omega) - (omega F - F^2 - c)| with F and F' from the continued fraction.
double riccati_residual(double c, Complex omega, const TransformOptions& opts = {});

struct ContinuationPath {
  Complex start;
  Complex end;
  /// Number of equal segments; Im F > 0 is monitored on every integration step.
  int steps = 1;
};

struct ContinuationResult {
  Complex F;
  Complex dF;
  double est_error = 0.0;
  long ode_steps = 0;
  double min_im_F = 0.0;
};

/// F_{mu_c} at path.end by integrating F' = omega F - F^2 - c from the continued-fraction
/// value at path.start. Throws ContinuationError if Im F <= 0 is reached along the way.
ContinuationResult riccati_continue_F(double c, const ContinuationPath& path, const TransformOptions& opts = {});

struct AwkVerifyOptions {
  HalfPlaneGrid upper{HalfPlane::Upper};
  double re_min = -3.0;
  double re_max = 3.0;
  int re_points = 61;
  double im_min = -0.5;
  int im_points = 10;
  double start_im = 2.0;
  double slack = 1e-8;
  /// Fraction of below-axis points whose status must be resolved.
  double min_coverage = 0.9;
  TransformOptions transform;
};

/// Composite free selfdecomposability check for mu_c, c in [-1, 0]: Im(z - F/F') <= 0 on a
/// C+ grid, then the sign of each term of Im(F'/F) = Im omega - Im F - c Im(1/F) at points
/// below the axis reached by Riccati continuation.
CheckReport awk_fsd_verify(double c, const AwkVerifyOptions& opts = {});

}  // namespace freeprob
