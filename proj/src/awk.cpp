#include "freeprob/awk.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>

#include "freeprob/numerics.hpp"
#include "freeprob/riccati.hpp"

namespace freeprob {

Rational associated_hermite_eval(unsigned n, const Rational& x, const Rational& c) {
  if (n == 0) return Rational(1);
  Rational prev(1), cur(x);
  for (unsigned k = 1; k < n; ++k) {
    Rational next = x * cur - (c + k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double associated_hermite_eval(unsigned n, double x, double c) {
  if (n == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (unsigned k = 1; k < n; ++k) {
    double next = x * cur - (c + k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

namespace {

// int_0^inf exp(-z x - x^2/2) x^(c-1) dx along the ray arg x = psi.
Complex cylinder_integral(double c, Complex z) {
  double psi = 0.0;
  if (std::abs(z) > 0.0) psi = std::clamp(-std::arg(z), -kPi / 5.0, kPi / 5.0);
  Complex rot = std::polar(1.0, psi);
  Complex rot2 = rot * rot;
  Complex phase = std::polar(1.0, psi * c);
  double scale = 1.0 / (1.0 + std::abs(z));
  // |psi| <= pi/5 keeps cos(2 psi) > 0.3, so past this the integrand is far below the
  // smallest double; cutting there also avoids 0 * inf when s = u^(1/c) overflows.
  const double s_cut = 7.0 * std::abs(z) + 60.0;
  Complex value;
  if (c < 1.0) {
    // s = u^(1/c) removes the s^(c-1) singularity: s^(c-1) ds = du / c.
    auto f = [&](double u) {
      if (u == 0.0) return Complex(1.0 / c, 0.0) * phase;
      double s = std::pow(u, 1.0 / c);
      if (!(s < s_cut)) return Complex(0.0, 0.0);
      return phase / c * std::exp(-z * s * rot - 0.5 * s * s * rot2);
    };
    std::vector<double> bp{std::pow(scale, c), 1.0, std::pow(3.0, c)};
    value = numerics::integrate_complex(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13, bp).value;
  } else {
    auto f = [&](double s) {
      if (s == 0.0) return c == 1.0 ? phase : Complex(0.0, 0.0);
      if (s >= s_cut) return Complex(0.0, 0.0);
      return phase * std::pow(s, c - 1.0) * std::exp(-z * s * rot - 0.5 * s * s * rot2);
    };
    std::vector<double> bp{scale, 1.0, 3.0};
    value = numerics::integrate_complex(f, 0.0, std::numeric_limits<double>::infinity(), 1e-13, bp).value;
  }
  return value;
}

}  // namespace

Complex parabolic_cylinder_D(double c, Complex z) {
  if (!(c > 0.0)) throw DomainError("the integral representation of D_{-c} needs c > 0");
  return std::exp(-z * z / 4.0) / std::tgamma(c) * cylinder_integral(c, z);
}

MeasureSpec awk_measure(double c) { return catalog_lookup("awk", {{"c", Rational(c)}}); }

double awk_density(double c, double t, const TransformOptions& opts) {
  if (!(c > -1.0)) throw DomainError("the AWK density exists for c > -1");
  if (c == 0.0) return std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi);
  if (c > 0.0) {
    // kappa_c ~ |t|^{2c} e^{-t^2/2} / Gamma(c+1) / sqrt(2 pi): past this point it is below the smallest double.
    double at = std::abs(t);
    if (at > 10.0 && 0.5 * at * at - 2.0 * c * std::log(at) + std::lgamma(c + 1.0) > 760.0) return 0.0;
    // kappa_c = |D_{-c}(it)|^-2 / (sqrt(2 pi) Gamma(c+1)), with the e^{t^2/4} factor of D taken out.
    double I2 = std::norm(cylinder_integral(c, Complex(0.0, std::abs(t))));
    return std::exp(std::lgamma(c) - 0.5 * t * t) / (c * std::sqrt(2.0 * kPi) * I2);
  }
  MeasureSpec m = awk_measure(c);
  auto g = [&](Complex z) { return cauchy_eval(m, z, opts).value; };
  return stieltjes_inversion(g, t).value;
}

double riccati_residual(double c, Complex omega, const TransformOptions& opts) {
  if (c < -1.0) throw DomainError("AWK parameter must satisfy c >= -1");
  if (!(omega.imag() > 0.0)) throw DomainError("riccati_residual needs omega in C+");
  Complex F, dF;
  if (c == -1.0) {
    F = omega;
    dF = 1.0;
  } else {
    TransformOptions o = opts;
    o.prefer = Method::ContinuedFraction;
    auto J = reciprocal_jet(awk_measure(c), omega, o);
    F = J.F;
    dF = J.dF;
  }
  return std::abs(dF - (omega * F - F * F - c));
}

ContinuationResult riccati_continue_F(double c, const ContinuationPath& path, const TransformOptions& opts) {
  if (c < -1.0) throw DomainError("AWK parameter must satisfy c >= -1");
  if (!(path.start.imag() > 0.0)) throw DomainError("continuation must start in C+");
  if (path.steps < 1) throw DomainError("continuation needs at least one segment");
  Complex F;
  double err = 0.0;
  if (c == -1.0) {
    F = path.start;
  } else {
    TransformOptions o = opts;
    o.prefer = Method::ContinuedFraction;
    auto J = reciprocal_jet(awk_measure(c), path.start, o);
    F = J.F;
    err = J.est_error;
  }
  RiccatiOptions ro;
  ro.tol = opts.riccati_tol;
  ro.require_upper = true;
  ContinuationResult out;
  out.min_im_F = F.imag();
  Complex from = path.start;
  for (int k = 1; k <= path.steps; ++k) {
    Complex to = path.start + (path.end - path.start) * (static_cast<double>(k) / path.steps);
    auto st = riccati_integrate(c, from, F, to, ro);
    F = st.F;
    out.dF = st.dF;
    err += st.est_error;
    out.ode_steps += st.steps;
    out.min_im_F = std::min(out.min_im_F, st.min_im_F);
    from = to;
  }
  if (path.steps >= 1 && path.start == path.end) out.dF = path.end * F - F * F - c;
  out.F = F;
  out.est_error = err;
  return out;
}

// ---------------------------------------------------------------------------
// Composite check
// ---------------------------------------------------------------------------

namespace {

struct Worst {
  double value = -std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();
  Complex point{};

  void offer(double v, std::size_t i, Complex p) {
    if (v > value || (v == value && i < index)) {
      value = v;
      index = i;
      point = p;
    }
  }
};

enum class PointStatus { InOmega, Exited, Unresolved };

}  // namespace

CheckReport awk_fsd_verify(double c, const AwkVerifyOptions& opts) {
  if (c < -1.0) throw DomainError("AWK parameter must satisfy c >= -1");
  opts.upper.validate();
  if (opts.upper.half != HalfPlane::Upper) throw DomainError("awk_fsd_verify needs an upper half-plane grid");
  if (opts.re_points < 2 || opts.im_points < 1 || !(opts.im_min < 0.0) || !(opts.re_max > opts.re_min) ||
      !(opts.start_im > 0.0))
    throw DomainError("invalid below-axis rectangle");
  const bool proven_range = c <= 0.0;
  const TransformOptions& to = opts.transform;

  CheckReport rep;
  rep.check = "awk_fsd";
  rep.tolerance = opts.slack;
  rep.grid = opts.upper;
  rep.sampled = true;

  // Part 1: C+ grid, Im(z - F/F') <= 0 (F/F' is the reciprocal Cauchy transform of Kerov's measure).
  MeasureSpec m = c == -1.0 ? catalog_lookup("dirac", {{"a", Rational(0)}}) : awk_measure(c);
  auto pts = opts.upper.points();
  std::vector<double> q(pts.size(), std::numeric_limits<double>::quiet_NaN());
  numerics::parallel_for(pts.size(), [&](std::size_t i) {
    Complex z = pts[i];
    try {
      Complex F = z, dF = 1.0;
      if (c != -1.0) {
        auto J = reciprocal_jet(m, z, to);
        F = J.F;
        dF = J.dF;
      }
      q[i] = (z - F / dF).imag();
    } catch (const Error&) {
    }
  });
  Worst upper;
  std::size_t upper_failures = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::isnan(q[i])) {
      ++upper_failures;
      continue;
    }
    upper.offer(q[i], i, pts[i]);
  }

  // Part 2: vertical continuation columns into the rectangle below the axis.
  const int nx = opts.re_points, ny = opts.im_points;
  std::vector<PointStatus> status(static_cast<std::size_t>(nx * ny), PointStatus::Unresolved);
  std::vector<double> lower_q(status.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<int> term_violation(status.size(), 0);
  std::vector<Complex> lower_pts(status.size());
  std::vector<double> exit_im(static_cast<std::size_t>(nx), std::numeric_limits<double>::quiet_NaN());
  numerics::parallel_for(static_cast<std::size_t>(nx), [&](std::size_t ix) {
    double x = opts.re_min + (opts.re_max - opts.re_min) * static_cast<double>(ix) / (nx - 1);
    for (int k = 1; k <= ny; ++k) lower_pts[ix * ny + (k - 1)] = Complex(x, opts.im_min * k / ny);
    Complex from(x, opts.start_im);
    Complex F;
    try {
      if (c == -1.0) {
        F = from;
      } else {
        TransformOptions o = to;
        o.prefer = Method::ContinuedFraction;
        F = reciprocal_jet(m, from, o).F;
      }
    } catch (const Error&) {
      return;
    }
    RiccatiOptions ro;
    ro.tol = to.riccati_tol;
    ro.require_upper = true;
    for (int k = 1; k <= ny; ++k) {
      std::size_t idx = ix * ny + (k - 1);
      Complex target = lower_pts[idx];
      try {
        auto st = riccati_integrate(c, from, F, target, ro);
        F = st.F;
        from = target;
      } catch (const LeftDomainError& e) {
        exit_im[ix] = e.where().imag();
        for (int r = k; r <= ny; ++r) status[ix * ny + (r - 1)] = PointStatus::Exited;
        return;
      } catch (const Error&) {
        return;
      }
      status[idx] = PointStatus::InOmega;
      Complex w = target;
      double t1 = w.imag();
      double t2 = -F.imag();
      double t3 = -c * (1.0 / F).imag();
      Complex h = w - F - c / F;  // F'/F
      if (proven_range && (t1 > 0.0 || t2 > 0.0 || t3 > opts.slack)) term_violation[idx] = 1;
      lower_q[idx] = (w - 1.0 / h).imag();
    }
  });
  Worst lower;
  std::size_t in_omega = 0, exited = 0, unresolved = 0, violations = 0;
  for (std::size_t i = 0; i < status.size(); ++i) {
    switch (status[i]) {
      case PointStatus::InOmega:
        ++in_omega;
        lower.offer(lower_q[i], i, lower_pts[i]);
        violations += static_cast<std::size_t>(term_violation[i]);
        break;
      case PointStatus::Exited: ++exited; break;
      case PointStatus::Unresolved: ++unresolved; break;
    }
  }
  double coverage = static_cast<double>(in_omega + exited) / static_cast<double>(status.size());

  rep.evaluated = pts.size() + status.size();
  rep.evaluation_failures = upper_failures + unresolved;
  rep.margin = std::max(upper.value, lower.value);
  bool upper_fail = upper.value > opts.slack;
  bool lower_fail = in_omega > 0 && lower.value > opts.slack;
  bool too_many_failures = static_cast<double>(upper_failures) > 0.01 * static_cast<double>(pts.size());
  if (upper_fail || lower_fail || violations > 0) {
    rep.verdict = Verdict::Fail;
    rep.witness = upper.value >= lower.value ? upper.point : lower.point;
    rep.statement = "Im(omega - F(omega)/F'(omega)) > 0 at the witness: mu_c is not freely selfdecomposable (up to numerical error)";
  } else if (coverage < opts.min_coverage || too_many_failures) {
    rep.verdict = Verdict::Inconclusive;
    rep.statement = "continuation coverage below the required fraction; no violation seen on resolved points";
  } else {
    rep.verdict = Verdict::Pass;
    rep.statement = "no violation of Im(omega - F/F') <= 0 on the C+ grid or on continued points below the axis (grid-consistent with free selfdecomposability)";
  }
  if (!proven_range) rep.statement += "; exploratory run, c > 0 lies outside the proven range";
  rep.details["c"] = c;
  rep.details["exploratory"] = !proven_range;
  rep.details["upper_grid"] = {{"max_im", upper.value}, {"evaluation_failures", upper_failures}};
  Json cols = Json::array();
  for (int ix = 0; ix < nx; ++ix) {
    double x = opts.re_min + (opts.re_max - opts.re_min) * static_cast<double>(ix) / (nx - 1);
    Json col{{"re", x}};
    col["exit_im"] = std::isnan(exit_im[ix]) ? Json(nullptr) : Json(exit_im[ix]);
    cols.push_back(col);
  }
  rep.details["below_axis"] = {{"re_range", {opts.re_min, opts.re_max}},
                               {"im_range", {opts.im_min, 0.0}},
                               {"points", status.size()},
                               {"in_omega", in_omega},
                               {"exited", exited},
                               {"unresolved", unresolved},
                               {"coverage", coverage},
                               {"min_coverage", opts.min_coverage},
                               {"max_im", in_omega > 0 ? Json(lower.value) : Json(nullptr)},
                               {"term_sign_violations", violations},
                               {"columns", cols}};
  return rep;
}

}  // namespace freeprob
