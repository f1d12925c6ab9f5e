#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace freeprob {

using Complex = std::complex<double>;
using Rational = mpq_class;

inline constexpr double kPi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode a caller can act on has its own type.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parameter outside the family's domain (e.g. free Meixner with b < -1).
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnknownMeasureError : public Error {
 public:
  using Error::Error;
};

/// The measure has no representation able to serve the request.
class UnsupportedRepresentationError : public Error {
 public:
  using Error::Error;
};

/// Not enough stored coefficients/moments for the requested order.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class NotAMomentSequenceError : public Error {
 public:
  using Error::Error;
};

class OrderCapError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

/// Continued fraction did not settle before the depth cap.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, Complex previous, Complex last)
      : Error(what), previous_(previous), last_(last) {}
  Complex previous() const { return previous_; }
  Complex last() const { return last_; }

 private:
  Complex previous_;
  Complex last_;
};

/// A point lies outside the region where an evaluator represents F_mu.
class OutsideDomainError : public Error {
 public:
  using Error::Error;
};

/// Newton continuation for F^{-1} broke down. `reached` is the fraction of the
/// continuation path (in log-radius) completed before failure.
class InversionError : public Error {
 public:
  InversionError(const std::string& what, double reached, Complex last_iterate)
      : Error(what), reached_(reached), last_(last_iterate) {}
  double reached() const { return reached_; }
  Complex last_iterate() const { return last_; }

 private:
  double reached_;
  Complex last_;
};

class DerivativeSingularityError : public Error {
 public:
  using Error::Error;
};

class InversionUnstableError : public Error {
 public:
  using Error::Error;
};

/// Riccati continuation left Omega (Im F <= 0) or hit a singularity.
class ContinuationError : public Error {
 public:
  ContinuationError(const std::string& what, Complex where)
      : Error(what), where_(where) {}
  Complex where() const { return where_; }

 private:
  Complex where_;
};

/// The continuation reached Im F <= 0, i.e. the path left the region mapped into C+.
class LeftDomainError : public ContinuationError {
 public:
  using ContinuationError::ContinuationError;
};

// ---------------------------------------------------------------------------
// Small parsing and formatting helpers shared by the CLI and serializers.
// ---------------------------------------------------------------------------

/// Parses "3", "-0.75", "1/3", "2.5e-3" into an exact rational.
Rational parse_rational(std::string_view text);

/// Parses "2i", "-1i", "1.1-0.1i", "3", "1+2i", "i", "-i".
Complex parse_complex(std::string_view text);

std::string to_string(const Rational& q);
double to_double(const Rational& q);

/// Fixed 17-significant-digit rendering used in every machine-readable output.
std::string format_double(double x);
std::string format_complex(Complex z);

}  // namespace freeprob
