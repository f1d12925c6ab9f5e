#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "freeprob/core.hpp"
#include "freeprob/measures.hpp"
#include "freeprob/report.hpp"

namespace freeprob {

using RationalMatrix = std::vector<std::vector<Rational>>;

/// kappa_1..kappa_N.
struct FreeCumulantSequence {
  std::vector<Rational> entries;

  std::size_t order() const { return entries.size(); }
  const Rational& kappa(std::size_t n) const { return entries.at(n - 1); }
};

/// Blocks of a set partition of {1..n}, each block sorted, blocks ordered by minimum.
struct NCPartition {
  std::vector<std::vector<int>> blocks;
};

inline constexpr int kNcOrderCap = 12;

std::vector<NCPartition> nc_partitions(int n);
bool is_non_crossing(const NCPartition& p);
/// Moebius function mu(pi, 1_n) of the non-crossing partition lattice.
Rational nc_moebius_to_top(const NCPartition& p, int n);

FreeCumulantSequence free_cumulants_from_moments(const MomentSequence& m);
MomentSequence moments_from_free_cumulants(const FreeCumulantSequence& k);
/// kappa_n by explicit Moebius inversion over NC(n); n <= 12.
Rational nc_partition_oracle(const MomentSequence& m, int n);

/// Exact PSD decision by symmetric-pivoted LDL^T over the rationals.
struct PsdDecision {
  bool psd = true;
  std::size_t rank = 0;
  std::vector<std::size_t> pivot_order;
  std::vector<Rational> pivots;
  /// When not PSD: v with v^T A v < 0, and that value.
  std::optional<std::vector<Rational>> witness;
  Rational witness_value = 0;
};

PsdDecision decide_psd(const RationalMatrix& A);
Rational determinant(const RationalMatrix& A);

struct HankelReport {
  std::size_t order = 0;
  RationalMatrix matrix;
  bool psd = true;
  std::vector<Rational> leading_minors;
  /// 1-based index of the first negative leading minor, if any.
  std::optional<std::size_t> failing_minor;
  std::size_t rank = 0;
  std::vector<Rational> pivots;
  std::optional<std::vector<Rational>> witness;
  Rational witness_value = 0;
  std::string note;
};

/// Builds (a_{i+j})_{i,j=1..N} from a = (a_1, a_2, ...) and decides PSD exactly.
HankelReport is_conditionally_positive_definite(const std::vector<Rational>& a, std::size_t N);

CheckReport fsd_cumulant_criterion(const MomentSequence& m, std::size_t N,
                                   bool compact_support = false);
CheckReport fid_cumulant_criterion(const MomentSequence& m, std::size_t N,
                                   bool compact_support = false);

struct GrowthEstimate {
  double c = 0.0;
  std::size_t witness_n = 0;
  /// max_{n <= N} |kappa_n|^{1/n} for each prefix length N = 1..order.
  std::vector<double> prefix_estimates;
};

GrowthEstimate exponential_growth_check(const FreeCumulantSequence& k);

Json to_json(const HankelReport& h);

}  // namespace freeprob
