#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/measures.hpp"

namespace freeprob {

enum class Method { ContinuedFraction, Quadrature, ClosedForm, NewtonInversion, RiccatiContinuation };

std::string to_string(Method m);

struct TransformOptions {
  /// Starting continued-fraction depth; doubled until two depths agree.
  std::size_t cf_depth = 16;
  std::size_t cf_max_depth = std::size_t{1} << 14;
  double cf_adaptive_tol = 1e-14;
  double quad_tol = 1e-10;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  int continuation_steps = 32;
  /// Radius on the ray through w where Newton continuation starts.
  double continuation_radius = 1e3;
  int max_bisections = 14;
  double riccati_tol = 1e-13;
  /// Below this (standardized) imaginary part G is continued by the Riccati ODE
  /// instead of the continued fraction.
  double riccati_anchor = 2.0;
  /// Compare C' with a contour-integral derivative of C on every evaluation.
  bool cross_validate = false;
  double cross_validate_tol = 1e-6;
  /// Force a particular G evaluator when the measure carries it.
  std::optional<Method> prefer;

  /// Throws DomainError when a tolerance is not positive or a count is zero.
  void validate() const;
};

struct TransformValue {
  Complex value{};
  double est_error = 0.0;
  Method method = Method::ClosedForm;
};

struct ContinuedFractionValue {
  Complex G{};
  Complex dG{};
  double est_error = 0.0;
  std::size_t depth = 0;
};

/// Adaptive evaluation of 1/(z - alpha_0 - beta_1/(z - alpha_1 - ...)) and its z-derivative.
/// Truncation uses a zero tail; the depth is doubled until successive values agree.
ContinuedFractionValue continued_fraction_eval(const JacobiCoefficients& j, Complex z,
                                               const TransformOptions& opts = {});

/// G and G' by the highest-priority representation of m that covers z.
struct CauchyJetValue {
  Complex G{};
  Complex dG{};
  double est_error = 0.0;
  Method method = Method::ClosedForm;
};
CauchyJetValue cauchy_jet(const MeasureSpec& m, Complex z, const TransformOptions& opts = {});

struct ReciprocalJetValue {
  Complex F{};
  Complex dF{};
  double est_error = 0.0;
  Method method = Method::ClosedForm;
};
/// F and F'. Off C+ this only succeeds for closed forms and Riccati continuation.
ReciprocalJetValue reciprocal_jet(const MeasureSpec& m, Complex z, const TransformOptions& opts = {});

TransformValue cauchy_eval(const MeasureSpec& m, Complex z, const TransformOptions& opts = {});
TransformValue reciprocal_cauchy_eval(const MeasureSpec& m, Complex z, const TransformOptions& opts = {});

struct InversionResult {
  Complex z{};
  double residual = 0.0;
  int continuation_steps = 0;
  int newton_iterations = 0;
};
InversionResult invert_reciprocal_cauchy_detailed(const MeasureSpec& m, Complex w,
                                                  const TransformOptions& opts = {});
Complex invert_reciprocal_cauchy(const MeasureSpec& m, Complex w, const TransformOptions& opts = {});

struct RayInversionPoint {
  bool ok = false;
  InversionResult result;
  /// F and F' at result.z.
  ReciprocalJetValue jet;
  std::string error;
  double reached = 0.0;
};

/// F^{-1} at several points of one ray from the origin, ordered by decreasing modulus.
/// A single continuation runs down the ray and each target is solved to newton_tol.
/// After a breakdown the remaining points are reported as failed.
std::vector<RayInversionPoint> invert_along_ray(const MeasureSpec& m, const std::vector<Complex>& targets,
                                                const TransformOptions& opts = {});

TransformValue free_cumulant_transform_eval(const MeasureSpec& m, Complex w,
                                            const TransformOptions& opts = {});
TransformValue free_cumulant_transform_derivative_eval(const MeasureSpec& m, Complex w,
                                                       const TransformOptions& opts = {});
TransformValue voiculescu_eval(const MeasureSpec& m, Complex z, const TransformOptions& opts = {});

/// |C'(w) - (contour derivative of C at w)|, with the contour kept inside C-.
double cprime_contour_discrepancy(const MeasureSpec& m, Complex w, const TransformOptions& opts = {});

/// |C(-i v)| at small v: C should vanish at the origin along the negative imaginary axis.
double cumulant_origin_defect(const MeasureSpec& m, double v = 1e-4, const TransformOptions& opts = {});

/// |iy G(iy) - 1|.
double normalization_defect(const MeasureSpec& m, double y, const TransformOptions& opts = {});

struct StieltjesOptions {
  double y0 = 0.5;
  int levels = 24;
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  /// Extrapolation error above this is reported as unstable.
  double max_error = 1e-2;
};

struct StieltjesResult {
  double value = 0.0;
  double est_error = 0.0;
  int levels_used = 0;
  double y_min = 0.0;
};

/// -(1/pi) lim_{y->0+} Im g(x + i y), Richardson-extrapolated over y = y0 2^-k.
StieltjesResult stieltjes_inversion(const std::function<Complex(Complex)>& g, double x,
                                    const StieltjesOptions& opts = {});

}  // namespace freeprob
