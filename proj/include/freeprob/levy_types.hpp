#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "freeprob/core.hpp"

namespace freeprob {

struct Atom {
  Rational x;
  Rational mass;
};

/// Finite positive measure: exact atoms plus an optional Lebesgue density on [lo, hi].
struct FiniteMeasure {
  std::vector<Atom> atoms;
  std::function<double(double)> density;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;

  bool has_density() const { return static_cast<bool>(density); }
  bool empty() const { return atoms.empty() && !density; }
  Rational atom_mass_at(const Rational& x) const;
  Rational atom_mass() const;
  /// Atom mass plus quadrature of the density.
  double total_mass(double tol = 1e-12) const;

  static FiniteMeasure from_atoms(std::vector<Atom> atoms);
};

enum class LevyForm { Zero, Atoms, KFunction, Density, Nevanlinna };

/// Free Levy measure. The continuous part is always held as nu(dx) = k(x)/|x| dx;
/// a density d is stored as k(x) = |x| d(x). `form` remembers how it was supplied.
struct LevyMeasure {
  LevyForm form = LevyForm::Zero;
  std::vector<Atom> atoms;
  std::function<double(double)> k;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<double> breakpoints;
  /// Analytic monotonicity knowledge supplied by the catalog, if any.
  std::optional<bool> declared_monotone;
  /// Set when k was derived from a Nevanlinna measure rho; enables closed inner integrals.
  std::shared_ptr<const FiniteMeasure> rho;

  bool has_continuous() const { return static_cast<bool>(k); }
  double density(double x) const { return x == 0.0 || !k ? 0.0 : k(x) / std::abs(x); }

  static LevyMeasure zero();
  static LevyMeasure from_atoms(std::vector<Atom> atoms);
  static LevyMeasure from_k(std::function<double(double)> k, double lo, double hi,
                            std::vector<double> breakpoints = {});
  static LevyMeasure from_density(std::function<double(double)> d, double lo, double hi,
                                  std::vector<double> breakpoints = {});
};

struct FreeCharacteristicTriplet {
  Rational a;
  Rational eta;
  LevyMeasure nu;
};

struct GeneratingPair {
  Rational gamma;
  FiniteMeasure sigma;
};

struct NevanlinnaPair {
  Rational xi;
  FiniteMeasure rho;
};

}  // namespace freeprob
