#pragma once

#include <cstddef>
#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/levy_types.hpp"
#include "freeprob/report.hpp"

namespace freeprob {

inline constexpr double kLevyQuadTol = 1e-12;

/// sigma({0}) = a, sigma = t^2/(1+t^2) nu off 0, gamma = eta - int t(1_[-1,1] - 1/(1+t^2)) nu(dt).
GeneratingPair pair_from_triplet(const FreeCharacteristicTriplet& t, double tol = kLevyQuadTol);
FreeCharacteristicTriplet triplet_from_pair(const GeneratingPair& p, double tol = kLevyQuadTol);

/// k(x) = int_{y >= x} (1+y^2)/y^2 rho(dy) for x > 0, and the lower tail for x < 0.
double k_from_rho(const FiniteMeasure& rho, double x, double tol = kLevyQuadTol);

FreeCharacteristicTriplet triplet_from_nevanlinna(const NevanlinnaPair& p, double tol = kLevyQuadTol);

/// a w^2 + eta w + int (1/(1 - w x) - 1 - w x 1_[-1,1](x)) nu(dx).
Complex levy_khintchine_eval(const FreeCharacteristicTriplet& t, Complex w, double tol = kLevyQuadTol);

/// gamma + int (1 + t z)/(z - t) sigma(dt).
Complex voiculescu_from_pair_eval(const GeneratingPair& p, Complex z, double tol = kLevyQuadTol);

/// int min(1, x^2) nu(dx); throws DomainError when it diverges.
double levy_integrability(const LevyMeasure& nu, double tol = kLevyQuadTol);

/// kappa_1..kappa_N read off the triplet (requires the corresponding moments of nu).
std::vector<double> free_cumulants_from_triplet(const FreeCharacteristicTriplet& t, std::size_t N,
                                                double tol = kLevyQuadTol);

struct MonotonicityOptions {
  int min_exponent = -20;
  int max_exponent = 20;
  int per_octave = 64;
  int refine_points = 64;
  double rel_tol = 1e-10;
  double abs_tol = 1e-14;
};

/// Sampled check that nu = k(x)/|x| dx with k non-decreasing on (-inf, 0) and
/// non-increasing on (0, inf). Atoms fail immediately.
CheckReport fsd_monotonicity_check(const LevyMeasure& nu, const MonotonicityOptions& opts = {});

Json to_json(const FiniteMeasure& m);
Json to_json(const LevyMeasure& nu);
Json to_json(const FreeCharacteristicTriplet& t);
Json to_json(const GeneratingPair& p);
Json to_json(const NevanlinnaPair& p);

}  // namespace freeprob
