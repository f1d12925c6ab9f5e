#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/levy_types.hpp"

namespace freeprob {

/// m_0..m_N as exact rationals.
struct MomentSequence {
  std::vector<Rational> entries;

  std::size_t order() const { return entries.empty() ? 0 : entries.size() - 1; }
  const Rational& operator[](std::size_t n) const { return entries.at(n); }
};

/// Coefficients beyond the stored head: alpha_k = alpha, beta_n = beta_const + beta_slope * n.
struct JacobiTail {
  Rational alpha;
  Rational beta_const;
  Rational beta_slope;
};

// Three-term recurrence x p_k = p_{k+1} + alpha_k p_k + beta_k p_{k-1}.
// alpha holds alpha_0, alpha_1, ...; beta holds beta_1, beta_2, ... (beta_0 is unused).
class JacobiCoefficients {
 public:
  enum class Extent { Terminating, Truncated, Tail };

  /// Finite support: alpha_0..alpha_{n-1}, beta_1..beta_{n-1}; the fraction ends exactly.
  static JacobiCoefficients terminating(std::vector<Rational> alpha, std::vector<Rational> beta);
  /// Known only up to the stored length.
  static JacobiCoefficients truncated(std::vector<Rational> alpha, std::vector<Rational> beta);
  static JacobiCoefficients with_tail(std::vector<Rational> alpha, std::vector<Rational> beta,
                                      JacobiTail tail);

  Extent extent() const { return extent_; }
  const std::vector<Rational>& alpha_head() const { return alpha_; }
  const std::vector<Rational>& beta_head() const { return beta_; }
  const std::optional<JacobiTail>& tail() const { return tail_; }

  /// Number of alpha_k available (SIZE_MAX when a tail is present).
  std::size_t alpha_count() const;
  /// Number of beta_n (n >= 1) available.
  std::size_t beta_count() const;

  Rational alpha(std::size_t k) const;
  /// beta_n for n >= 1. Past the end of a terminating sequence this is 0.
  Rational beta(std::size_t n) const;
  double alpha_d(std::size_t k) const;
  double beta_d(std::size_t n) const;

  /// Largest continued-fraction depth that uses only known coefficients.
  std::size_t max_depth() const;
  /// Head length after which alpha and beta are both constant (constant tail only).
  std::optional<std::size_t> constant_tail_start() const;

 private:
  JacobiCoefficients(std::vector<Rational> alpha, std::vector<Rational> beta, Extent extent,
                     std::optional<JacobiTail> tail);

  std::vector<Rational> alpha_;
  std::vector<Rational> beta_;
  Extent extent_;
  std::optional<JacobiTail> tail_;
  std::vector<double> alpha_d_;
  std::vector<double> beta_d_;
  double tail_alpha_d_ = 0.0;
  double tail_beta_const_d_ = 0.0;
  double tail_beta_slope_d_ = 0.0;
};

/// Power-law tail pdf(t) ~ coeff * |t|^-power used past the truncation radius.
struct TailModel {
  double coeff = 0.0;
  double power = 0.0;
};

struct DensitySpec {
  std::function<double(double)> pdf;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<std::pair<double, double>> atoms;
  std::vector<double> breakpoints;
  std::optional<TailModel> tail;
  /// Integration is cut at |t| <= truncation when the support is unbounded and a tail model exists.
  double truncation = 1e3;

  bool bounded() const;
};

/// G and G' on C+ and along its continuation across the support.
struct CauchyJet {
  Complex G;
  Complex dG;
};

struct ClosedFormTransforms {
  std::function<CauchyJet(Complex)> jet;
  std::string description;
};

/// F' = omega F - F^2 - c holds for the standardized law; the measure itself is
/// location + scale * standardized.
struct RiccatiData {
  double c = 0.0;
  double location = 0.0;
  double scale = 1.0;
};

using ParamRecord = std::map<std::string, Rational>;

struct MeasureSpec {
  std::string name;
  ParamRecord params;
  std::optional<MomentSequence> moments;
  std::optional<JacobiCoefficients> jacobi;
  std::optional<DensitySpec> density;
  std::optional<ClosedFormTransforms> closed_form;
  std::optional<FreeCharacteristicTriplet> triplet;
  std::optional<RiccatiData> riccati;
  /// Closed convex hull of the support when it is bounded.
  std::optional<std::pair<double, double>> compact_support;
  bool finite_variance = true;

  bool has_moment_source() const { return moments.has_value() || jacobi.has_value(); }
  bool supports_cauchy() const {
    return closed_form.has_value() || jacobi.has_value() || density.has_value() || riccati.has_value();
  }
  /// Moments m_0..m_N from the stored sequence or the Jacobi data.
  MomentSequence moment_sequence(std::size_t N) const;
  std::vector<std::string> representation_tags() const;
};

MomentSequence moments_from_jacobi(const JacobiCoefficients& j, std::size_t N);
JacobiCoefficients jacobi_from_moments(const MomentSequence& m);

/// m_0 = 1 and every Hankel block (m_{i+j})_{0<=i,j<=floor(N/2)} is positive semidefinite.
bool is_valid_moment_sequence(const MomentSequence& m);

/// Quadrature moments of a density representation (atoms added exactly).
std::vector<double> moments_from_density(const DensitySpec& d, std::size_t N, double tol = 1e-12);

/// Closed-form G built from Jacobi data with a constant tail (semicircle, free Meixner,
/// free Poisson, finite atomic laws). The square root is written as
/// i*sqrt(4 beta - (z - alpha)^2), which agrees with the Herglotz branch on C+ and
/// continues analytically through the support.
ClosedFormTransforms closed_form_from_jacobi(const JacobiCoefficients& j);

/// Gershgorin interval of the Jacobi matrix; it contains the support.
std::pair<double, double> jacobi_spectral_bounds(const JacobiCoefficients& j);

MeasureSpec catalog_lookup(const std::string& name, const ParamRecord& params);
std::vector<std::string> catalog_names();

}  // namespace freeprob
