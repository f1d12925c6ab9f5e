#include "freeprob/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "freeprob/cumulants.hpp"
#include "freeprob/numerics.hpp"

namespace freeprob {

// ---------------------------------------------------------------------------
// JacobiCoefficients
// ---------------------------------------------------------------------------

JacobiCoefficients::JacobiCoefficients(std::vector<Rational> alpha, std::vector<Rational> beta,
                                       Extent extent, std::optional<JacobiTail> tail)
    : alpha_(std::move(alpha)), beta_(std::move(beta)), extent_(extent), tail_(std::move(tail)) {
  for (std::size_t n = 0; n < beta_.size(); ++n)
    if (beta_[n] <= 0)
      throw DomainError("Jacobi beta_" + std::to_string(n + 1) + " must be positive");
  for (const auto& a : alpha_) alpha_d_.push_back(to_double(a));
  for (const auto& b : beta_) beta_d_.push_back(to_double(b));
  if (tail_) {
    if (tail_->beta_slope < 0) throw DomainError("Jacobi tail slope must be non-negative");
    Rational first = tail_->beta_const + tail_->beta_slope * static_cast<long>(beta_.size() + 1);
    if (first <= 0) throw DomainError("Jacobi tail produces a non-positive beta");
    tail_alpha_d_ = to_double(tail_->alpha);
    tail_beta_const_d_ = to_double(tail_->beta_const);
    tail_beta_slope_d_ = to_double(tail_->beta_slope);
  }
}

JacobiCoefficients JacobiCoefficients::terminating(std::vector<Rational> alpha,
                                                   std::vector<Rational> beta) {
  if (alpha.empty()) throw DomainError("terminating Jacobi data needs at least one alpha");
  if (beta.size() + 1 != alpha.size())
    throw DomainError("terminating Jacobi data needs exactly one fewer beta than alpha");
  return JacobiCoefficients(std::move(alpha), std::move(beta), Extent::Terminating, std::nullopt);
}

JacobiCoefficients JacobiCoefficients::truncated(std::vector<Rational> alpha,
                                                 std::vector<Rational> beta) {
  return JacobiCoefficients(std::move(alpha), std::move(beta), Extent::Truncated, std::nullopt);
}

JacobiCoefficients JacobiCoefficients::with_tail(std::vector<Rational> alpha,
                                                 std::vector<Rational> beta, JacobiTail tail) {
  return JacobiCoefficients(std::move(alpha), std::move(beta), Extent::Tail, std::move(tail));
}

std::size_t JacobiCoefficients::alpha_count() const {
  return extent_ == Extent::Tail ? std::numeric_limits<std::size_t>::max() : alpha_.size();
}

std::size_t JacobiCoefficients::beta_count() const {
  return extent_ == Extent::Tail ? std::numeric_limits<std::size_t>::max() : beta_.size();
}

Rational JacobiCoefficients::alpha(std::size_t k) const {
  if (k < alpha_.size()) return alpha_[k];
  if (tail_) return tail_->alpha;
  if (extent_ == Extent::Terminating) return 0;
  throw TruncationError("alpha_" + std::to_string(k) + " is not stored");
}

Rational JacobiCoefficients::beta(std::size_t n) const {
  if (n == 0) throw Error("beta_0 is not part of the recurrence");
  if (n <= beta_.size()) return beta_[n - 1];
  if (tail_) return tail_->beta_const + tail_->beta_slope * static_cast<long>(n);
  if (extent_ == Extent::Terminating) return 0;
  throw TruncationError("beta_" + std::to_string(n) + " is not stored");
}

double JacobiCoefficients::alpha_d(std::size_t k) const {
  if (k < alpha_d_.size()) return alpha_d_[k];
  if (tail_) return tail_alpha_d_;
  if (extent_ == Extent::Terminating) return 0.0;
  throw TruncationError("alpha_" + std::to_string(k) + " is not stored");
}

double JacobiCoefficients::beta_d(std::size_t n) const {
  if (n >= 1 && n <= beta_d_.size()) return beta_d_[n - 1];
  if (tail_) return tail_beta_const_d_ + tail_beta_slope_d_ * static_cast<double>(n);
  if (extent_ == Extent::Terminating) return 0.0;
  throw TruncationError("beta_" + std::to_string(n) + " is not stored");
}

std::size_t JacobiCoefficients::max_depth() const {
  switch (extent_) {
    case Extent::Terminating:
      return alpha_.size();
    case Extent::Truncated:
      return std::min(alpha_.size(), beta_.size() + 1);
    case Extent::Tail:
      break;
  }
  return std::numeric_limits<std::size_t>::max();
}

std::optional<std::size_t> JacobiCoefficients::constant_tail_start() const {
  if (!tail_ || tail_->beta_slope != 0) return std::nullopt;
  return std::max(alpha_.size(), beta_.size());
}

// ---------------------------------------------------------------------------
// Moments <-> Jacobi
// ---------------------------------------------------------------------------

MomentSequence moments_from_jacobi(const JacobiCoefficients& j, std::size_t N) {
  // c[i] = coefficient of p_i in x^n; m_n = c[0]. Only states that can still
  // return to level 0 within N steps are tracked.
  std::vector<Rational> c{Rational(1)};
  MomentSequence out;
  out.entries.push_back(1);
  for (std::size_t n = 0; n < N; ++n) {
    std::size_t top = std::min(n + 1, N - n - 1);
    std::vector<Rational> next(top + 1);
    for (std::size_t i = 0; i <= top; ++i) {
      Rational v = 0;
      if (i >= 1 && i - 1 < c.size()) v += c[i - 1];
      if (i < c.size() && c[i] != 0) v += j.alpha(i) * c[i];
      if (i + 1 < c.size() && c[i + 1] != 0) v += j.beta(i + 1) * c[i + 1];
      next[i] = v;
    }
    c = std::move(next);
    out.entries.push_back(c[0]);
  }
  return out;
}

JacobiCoefficients jacobi_from_moments(const MomentSequence& m) {
  const std::size_t N = m.order();
  if (m.entries.empty() || m.entries[0] != 1)
    throw NotAMomentSequenceError("moment sequence must start with m_0 = 1");
  if (N < 1) throw NotAMomentSequenceError("need at least m_1");
  // Chebyshev algorithm with sigma_{k,l} = <p_k, x^l>, defined for l <= N - k.
  std::vector<Rational> alpha, beta;
  std::vector<Rational> prev(N + 1, Rational(0));                   // sigma_{k-2,.}
  std::vector<Rational> cur(m.entries.begin(), m.entries.end());    // sigma_{k-1,.}
  alpha.push_back(cur[1] / cur[0]);
  Rational beta_prev = 0;
  for (std::size_t k = 1; 2 * k <= N; ++k) {
    std::vector<Rational> nxt(N + 1, Rational(0));
    for (std::size_t l = k; l + k <= N; ++l) {
      nxt[l] = cur[l + 1] - alpha[k - 1] * cur[l];
      if (k >= 2) nxt[l] -= beta_prev * prev[l];
    }
    if (nxt[k] <= 0)
      throw NotAMomentSequenceError("Hankel matrix of order " + std::to_string(k + 1) +
                                    " is singular or indefinite");
    Rational bk = nxt[k] / cur[k - 1];
    beta.push_back(bk);
    if (2 * k + 1 <= N) alpha.push_back(nxt[k + 1] / nxt[k] - cur[k] / cur[k - 1]);
    prev = std::move(cur);
    cur = std::move(nxt);
    beta_prev = bk;
  }
  return JacobiCoefficients::truncated(std::move(alpha), std::move(beta));
}

bool is_valid_moment_sequence(const MomentSequence& m) {
  if (m.entries.empty() || m.entries[0] != 1) return false;
  std::size_t h = m.order() / 2;
  std::vector<std::vector<Rational>> H(h + 1, std::vector<Rational>(h + 1));
  for (std::size_t i = 0; i <= h; ++i)
    for (std::size_t j = 0; j <= h; ++j) H[i][j] = m.entries[i + j];
  return decide_psd(H).psd;
}

// ---------------------------------------------------------------------------
// Density quadrature
// ---------------------------------------------------------------------------

bool DensitySpec::bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

std::vector<double> moments_from_density(const DensitySpec& d, std::size_t N, double tol) {
  std::vector<double> out(N + 1, 0.0);
  double a = d.lo, b = d.hi;
  bool cut = !d.bounded() && d.tail.has_value();
  if (cut) {
    a = std::max(a, -d.truncation);
    b = std::min(b, d.truncation);
  }
  for (std::size_t n = 0; n <= N; ++n) {
    auto f = [&](double t) { return std::pow(t, static_cast<double>(n)) * d.pdf(t); };
    double v = numerics::integrate(f, a, b, tol, d.breakpoints).value;
    if (cut) {
      double p = d.tail->power;
      if (p <= static_cast<double>(n) + 1.0)
        throw DomainError("moment of order " + std::to_string(n) + " is infinite");
      double T = d.truncation;
      double one_side = d.tail->coeff * std::pow(T, static_cast<double>(n) + 1.0 - p) /
                        (p - static_cast<double>(n) - 1.0);
      if (n % 2 == 0) v += 2.0 * one_side;
    }
    for (const auto& [x, w] : d.atoms) v += w * std::pow(x, static_cast<double>(n));
    out[n] = v;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed forms from a constant Jacobi tail
// ---------------------------------------------------------------------------

ClosedFormTransforms closed_form_from_jacobi(const JacobiCoefficients& j) {
  std::size_t head = 0;
  bool terminating = j.extent() == JacobiCoefficients::Extent::Terminating;
  if (terminating) {
    head = j.alpha_head().size();
  } else if (auto start = j.constant_tail_start()) {
    head = *start;
  } else {
    throw UnsupportedRepresentationError("closed form needs terminating or constant-tail Jacobi data");
  }
  std::vector<double> a(head), b(head + 1);
  for (std::size_t k = 0; k < head; ++k) a[k] = j.alpha_d(k);
  for (std::size_t n = 1; n <= head; ++n) b[n] = j.beta_d(n);
  double ta = terminating ? 0.0 : to_double(j.tail()->alpha);
  double tb = terminating ? 0.0 : to_double(j.tail()->beta_const);

  ClosedFormTransforms cf;
  cf.description = terminating ? "finite continued fraction"
                               : "continued fraction head with algebraic constant tail";
  cf.jet = [a, b, ta, tb, terminating, head](Complex z) {
    Complex T{0.0, 0.0}, dT{0.0, 0.0};
    if (!terminating) {
      Complex u = z - ta;
      Complex q = Complex(0.0, 1.0) * std::sqrt(4.0 * tb - u * u);
      // (u - q) / (2 tb) = 2 / (u + q); take whichever form does not cancel.
      T = std::abs(u + q) >= std::abs(u - q) ? 2.0 / (u + q) : (u - q) / (2.0 * tb);
      // From tb T^2 - u T + 1 = 0.
      dT = -T / q;
    }
    for (std::size_t k = head; k-- > 0;) {
      double bn = b[k + 1];
      if (terminating && k + 1 == head) bn = 0.0;
      Complex D = z - a[k] - bn * T;
      Complex Tk = 1.0 / D;
      dT = -Tk * Tk * (1.0 - bn * dT);
      T = Tk;
    }
    return CauchyJet{T, dT};
  };
  return cf;
}

// ---------------------------------------------------------------------------
// MeasureSpec helpers
// ---------------------------------------------------------------------------

MomentSequence MeasureSpec::moment_sequence(std::size_t N) const {
  if (moments && moments->order() >= N) {
    MomentSequence out;
    out.entries.assign(moments->entries.begin(), moments->entries.begin() + static_cast<long>(N) + 1);
    return out;
  }
  if (jacobi) return moments_from_jacobi(*jacobi, N);
  if (moments)
    throw TruncationError("only " + std::to_string(moments->order()) + " moments stored, " +
                          std::to_string(N) + " requested");
  throw UnsupportedRepresentationError("measure '" + name + "' carries no moments");
}

std::vector<std::string> MeasureSpec::representation_tags() const {
  std::vector<std::string> tags;
  if (moments) tags.push_back("moments");
  if (jacobi) tags.push_back("jacobi");
  if (density) tags.push_back("density");
  if (closed_form) tags.push_back("closed_form");
  if (triplet) tags.push_back("triplet");
  if (riccati) tags.push_back("riccati");
  return tags;
}

}  // namespace freeprob
