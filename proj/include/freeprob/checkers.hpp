#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/levy_types.hpp"
#include "freeprob/measures.hpp"
#include "freeprob/report.hpp"
#include "freeprob/transforms.hpp"

namespace freeprob {

struct GridCheckOptions {
  /// Extent and density; the half-plane is set by each check.
  HalfPlaneGrid grid;
  double slack = 1e-8;
  /// More failed evaluations than this fraction of the grid makes the verdict inconclusive.
  double max_failure_fraction = 0.01;
  /// Re-run a failing grid once at higher density before reporting the failure.
  bool retry_dense = true;
  int dense_factor = 4;
  /// Sampled check that F^{-1}(F(z)) = z on C+; a violation fails both FID and FSD.
  bool injectivity_probe = true;
  int probe_radius_stride = 5;
  int probe_angle_stride = 8;
  double probe_tol = 1e-6;
  TransformOptions transform;
};

/// Max over the C+ grid of Im phi(z) must not exceed the slack.
CheckReport fid_grid_check(const MeasureSpec& m, const GridCheckOptions& opts = {});

/// Max over the C- grid of Im C'(w) must not exceed the slack. C' = omega - F(omega)/F'(omega)
/// with omega = F^{-1}(1/w).
CheckReport fsd_grid_check(const MeasureSpec& m, const GridCheckOptions& opts = {});

struct NevanlinnaOptions {
  /// Sampling window. Samples are equally spaced in atan(x) so the tails are reached.
  double x_min = -500.0;
  double x_max = 500.0;
  int points = 321;
  /// Extra samples at +-10^-k, k in (0, origin_decades], origin_per_decade per decade.
  /// x = 0 corresponds to w at infinity, where C' is out of reach, and rho may pile up there.
  int origin_decades = 6;
  int origin_per_decade = 4;
  /// Cells with |density jump| * width above refine_tol * rho(R) are bisected, for at most
  /// refine_rounds rounds and refine_points extra samples.
  double refine_tol = 1e-5;
  int refine_rounds = 30;
  int refine_points = 600;
  /// total_mass - sampled_mass above this fraction of rho(R) becomes an atom at x = 0.
  double origin_atom_threshold = 1e-2;
  /// Past the window rho-hat continues as (boundary value) * (1 + x_b^2) / (1 + x^2) out to here.
  double tail_extent = 1e6;
  /// y0 is multiplied by |x| at each sample other than the origin.
  StieltjesOptions stieltjes{0.25, 20, 1e-10, 1e-13, 1e-2};
  TransformOptions transform;
};

struct NevanlinnaEstimate {
  double xi = 0.0;
  /// rho(R) = -Im C'(-i).
  double total_mass = 0.0;
  std::vector<double> x;
  std::vector<double> density;
  std::vector<double> density_error;
  std::vector<bool> density_ok;
  /// Trapezoid mass of the sampled density.
  double sampled_mass = 0.0;
  std::size_t failures = 0;
  double tail_extent = 0.0;
  /// Mass attributed to an atom of rho at 0, where the density cannot be sampled.
  double origin_atom = 0.0;

  /// (xi, rho-hat) with rho-hat the piecewise-linear interpolant of the density samples,
  /// continued past the window by the 1/(1 + x^2) tail.
  NevanlinnaPair pair() const;
};

/// xi and rho(R) from C'(-i); the density of rho from Stieltjes inversion of
/// g(z) = C'(1/z) / (1 + x^2) on a real grid.
NevanlinnaEstimate nevanlinna_extract(const MeasureSpec& m, const NevanlinnaOptions& opts = {});

using ReciprocalJetEvaluator = std::function<ReciprocalJetValue(Complex)>;

/// Im(omega - F(omega)/F'(omega)) <= slack at every supplied point.
CheckReport ui_class_fsd_check(const ReciprocalJetEvaluator& F, const std::vector<Complex>& points,
                               double slack = 1e-8, double max_failure_fraction = 0.01,
                               std::optional<HalfPlaneGrid> grid = std::nullopt);

struct KerovOptions {
  HalfPlaneGrid grid{HalfPlane::Upper};
  double slack = 0.0;
  std::vector<double> asymptotic_y{10.0, 100.0, 1000.0};
  double asymptotic_tol = 1e-4;
  double max_failure_fraction = 0.01;
  TransformOptions transform;
};

/// h = F'/F = -G'/G for mu_c must be the Cauchy transform of a probability measure:
/// Im h < 0 on the grid and iy h(iy) -> 1.
CheckReport kerov_check(double c, const KerovOptions& opts = {});

Json to_json(const NevanlinnaEstimate& e);

}  // namespace freeprob
