#include "freeprob/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "freeprob/numerics.hpp"
#include "freeprob/riccati.hpp"

namespace freeprob {

std::string to_string(Method m) {
  switch (m) {
    case Method::ContinuedFraction: return "continued-fraction";
    case Method::Quadrature: return "quadrature";
    case Method::ClosedForm: return "closed-form";
    case Method::NewtonInversion: return "newton-inversion";
    case Method::RiccatiContinuation: return "riccati-continuation";
  }
  return "unknown";
}

void TransformOptions::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(name) + " must be a positive finite number");
  };
  positive(cf_adaptive_tol, "cf_adaptive_tol");
  positive(quad_tol, "quad_tol");
  positive(newton_tol, "newton_tol");
  positive(riccati_tol, "riccati_tol");
  positive(riccati_anchor, "riccati_anchor");
  positive(continuation_radius, "continuation_radius");
  positive(cross_validate_tol, "cross_validate_tol");
  if (cf_depth == 0 || cf_max_depth < cf_depth) throw DomainError("cf_depth must satisfy 0 < cf_depth <= cf_max_depth");
  if (newton_max_iter <= 0) throw DomainError("newton_max_iter must be positive");
  if (continuation_steps <= 0) throw DomainError("continuation_steps must be positive");
  if (max_bisections < 0) throw DomainError("max_bisections must be non-negative");
}

// ---------------------------------------------------------------------------
// Continued fraction
// ---------------------------------------------------------------------------

namespace {

CauchyJet cf_fixed(const JacobiCoefficients& j, Complex z, std::size_t depth) {
  Complex T{0.0, 0.0}, dT{0.0, 0.0};
  for (std::size_t k = depth; k-- > 0;) {
    double bn = k + 1 < depth ? j.beta_d(k + 1) : 0.0;
    Complex Tk = 1.0 / (z - j.alpha_d(k) - bn * T);
    dT = -Tk * Tk * (1.0 - bn * dT);
    T = Tk;
  }
  return {T, dT};
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

ContinuedFractionValue continued_fraction_eval(const JacobiCoefficients& j, Complex z,
                                               const TransformOptions& opts) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  ContinuedFractionValue out;
  if (j.extent() == JacobiCoefficients::Extent::Terminating) {
    out.depth = j.max_depth();
    auto jet = cf_fixed(j, z, out.depth);
    out.G = jet.G;
    out.dG = jet.dG;
    out.est_error = 4.0 * eps * static_cast<double>(out.depth + 1) * std::abs(out.G);
    return out;
  }
  std::size_t cap = std::min(opts.cf_max_depth, j.max_depth());
  if (cap < 2) throw TruncationError("continued fraction needs at least two levels of Jacobi data");
  std::size_t d = std::min(opts.cf_depth, cap / 2);
  d = std::max<std::size_t>(d, 1);
  CauchyJet prev = cf_fixed(j, z, d);
  for (;;) {
    std::size_t d2 = std::min(2 * d, cap);
    CauchyJet cur = cf_fixed(j, z, d2);
    double dg = std::abs(cur.G - prev.G);
    double ddg = std::abs(cur.dG - prev.dG);
    bool ok = finite(cur.G) && finite(cur.dG) && dg <= opts.cf_adaptive_tol * std::abs(cur.G) &&
              ddg <= 1e2 * opts.cf_adaptive_tol * std::abs(cur.dG);
    if (ok) {
      out.G = cur.G;
      out.dG = cur.dG;
      out.depth = d2;
      out.est_error = dg + 4.0 * eps * std::abs(cur.G);
      return out;
    }
    if (d2 >= cap)
      throw ConvergenceError("continued fraction did not converge by depth " + std::to_string(d2) + " at z = " +
                                 format_complex(z),
                             prev.G, cur.G);
    prev = cur;
    d = d2;
  }
}

// ---------------------------------------------------------------------------
// Density quadrature
// ---------------------------------------------------------------------------

namespace {

CauchyJetValue density_jet(const DensitySpec& d, Complex z, const TransformOptions& opts) {
  double a = d.lo, b = d.hi;
  bool cut = !d.bounded() && d.tail.has_value() && std::abs(z) < 0.5 * d.truncation;
  if (cut) {
    a = std::max(a, -d.truncation);
    b = std::min(b, d.truncation);
  }
  std::vector<double> bp = d.breakpoints;
  double x = z.real(), y = std::abs(z.imag());
  for (double s : {0.0, 1.0, 10.0, 100.0}) {
    bp.push_back(x + s * y);
    bp.push_back(x - s * y);
  }
  for (double s : {1.0, 10.0, 100.0}) {
    bp.push_back(s);
    bp.push_back(-s);
  }
  auto g = numerics::integrate_complex([&](double t) { return d.pdf(t) / (z - t); }, a, b, opts.quad_tol, bp);
  auto dg = numerics::integrate_complex(
      [&](double t) {
        Complex u = z - t;
        return -d.pdf(t) / (u * u);
      },
      a, b, opts.quad_tol, bp);
  CauchyJetValue out;
  out.G = g.value;
  out.dG = dg.value;
  out.est_error = g.error;
  out.method = Method::Quadrature;
  if (cut) {
    // pdf ~ C |t|^-p on both tails: 1/(z - t) expanded in z/t, even powers cancel.
    const double C = d.tail->coeff, p = d.tail->power, T = d.truncation;
    Complex zj{1.0, 0.0};
    for (int jj = 1; jj <= 15; ++jj) {
      Complex zprev = zj;
      zj *= z;
      if (jj % 2 == 0) continue;
      double denom = std::pow(T, p + jj) * (p + jj);
      out.G -= 2.0 * C * zj / denom;
      out.dG -= 2.0 * C * static_cast<double>(jj) * zprev / denom;
    }
  }
  for (const auto& [pos, mass] : d.atoms) {
    Complex u = z - pos;
    out.G += mass / u;
    out.dG -= mass / (u * u);
  }
  if (out.est_error > 1e4 * opts.quad_tol * std::max(1.0, std::abs(out.G)))
    throw QuadratureError("Cauchy integral did not reach the requested tolerance at z = " + format_complex(z));
  return out;
}

CauchyJetValue cf_jet(const JacobiCoefficients& j, Complex z, const TransformOptions& opts) {
  auto v = continued_fraction_eval(j, z, opts);
  return {v.G, v.dG, v.est_error, Method::ContinuedFraction};
}

constexpr std::size_t kRiccatiCfProbeDepth = 1024;

// F and F' for location + scale * (standardized law whose F solves the Riccati equation).
ReciprocalJetValue riccati_jet(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  const RiccatiData& r = *m.riccati;
  if (!m.jacobi) throw UnsupportedRepresentationError("Riccati continuation needs Jacobi data for its anchor");
  Complex zeta = (z - r.location) / r.scale;
  ReciprocalJetValue out;
  // Far from the bulk the continued fraction settles quickly and is far more accurate than a
  // long oscillatory ODE path, so the ODE only covers what the fraction cannot reach cheaply.
  bool try_cf = zeta.imag() >= opts.riccati_anchor;
  TransformOptions cf_opts = opts;
  if (!try_cf && zeta.imag() > 0.0) {
    cf_opts.cf_max_depth = std::min(opts.cf_max_depth, kRiccatiCfProbeDepth);
    try {
      auto g = cf_jet(*m.jacobi, z, cf_opts);
      out.F = 1.0 / g.G;
      out.dF = -g.dG / (g.G * g.G);
      out.est_error = g.est_error * std::norm(out.F);
      out.method = Method::ContinuedFraction;
      return out;
    } catch (const ConvergenceError&) {
    }
  }
  if (try_cf) {
    auto g = cf_jet(*m.jacobi, z, opts);
    out.F = 1.0 / g.G;
    out.dF = -g.dG / (g.G * g.G);
    out.est_error = g.est_error * std::norm(out.F);
    out.method = Method::ContinuedFraction;
    return out;
  }
  Complex zeta_a(zeta.real(), opts.riccati_anchor);
  Complex z_a = r.location + r.scale * zeta_a;
  auto g = cf_jet(*m.jacobi, z_a, opts);
  Complex F0 = 1.0 / (g.G * r.scale);
  RiccatiOptions ro;
  ro.tol = opts.riccati_tol;
  auto st = riccati_integrate(r.c, zeta_a, F0, zeta, ro);
  out.F = r.scale * st.F;
  out.dF = st.dF;
  out.est_error = r.scale * (st.est_error + g.est_error * std::norm(F0) * r.scale);
  out.method = Method::RiccatiContinuation;
  return out;
}

struct Jet {
  Complex G, dG, F, dF;
  double err_G = 0.0, err_F = 0.0;
  Method method = Method::ClosedForm;
};

Jet from_G(const CauchyJetValue& g) {
  Jet j;
  j.G = g.G;
  j.dG = g.dG;
  j.F = 1.0 / g.G;
  j.dF = -g.dG / (g.G * g.G);
  j.err_G = g.est_error;
  j.err_F = g.est_error * std::norm(j.F);
  j.method = g.method;
  return j;
}

Jet from_F(const ReciprocalJetValue& f) {
  Jet j;
  j.F = f.F;
  j.dF = f.dF;
  j.G = 1.0 / f.F;
  j.dG = -f.dF / (f.F * f.F);
  j.err_F = f.est_error;
  j.err_G = f.est_error * std::norm(j.G);
  j.method = f.method;
  return j;
}

Jet closed_jet(const MeasureSpec& m, Complex z) {
  auto c = m.closed_form->jet(z);
  return from_G({c.G, c.dG, 8.0 * std::numeric_limits<double>::epsilon() * std::abs(c.G), Method::ClosedForm});
}

Jet eval_jet(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  if (!finite(z)) throw DomainError("transform argument must be finite");
  bool upper = z.imag() > 0.0;
  if (opts.prefer) {
    switch (*opts.prefer) {
      case Method::ClosedForm:
        if (m.closed_form) return closed_jet(m, z);
        break;
      case Method::RiccatiContinuation:
        if (m.riccati) return from_F(riccati_jet(m, z, opts));
        break;
      case Method::ContinuedFraction:
        if (m.jacobi) {
          if (!upper) throw OutsideDomainError("continued fraction is only evaluated on C+");
          return from_G(cf_jet(*m.jacobi, z, opts));
        }
        break;
      case Method::Quadrature:
        if (m.density) {
          if (!upper) throw OutsideDomainError("density quadrature is only evaluated on C+");
          return from_G(density_jet(*m.density, z, opts));
        }
        break;
      case Method::NewtonInversion:
        break;
    }
  }
  if (m.closed_form) return closed_jet(m, z);
  if (m.riccati && m.jacobi) return from_F(riccati_jet(m, z, opts));
  if (m.jacobi || m.density) {
    if (!upper) throw OutsideDomainError("G is only represented on C+ for " + m.name + " at " + format_complex(z));
    if (m.jacobi) return from_G(cf_jet(*m.jacobi, z, opts));
    return from_G(density_jet(*m.density, z, opts));
  }
  throw UnsupportedRepresentationError(m.name + " has no representation that evaluates G");
}

}  // namespace

CauchyJetValue cauchy_jet(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  Jet j = eval_jet(m, z, opts);
  return {j.G, j.dG, j.err_G, j.method};
}

ReciprocalJetValue reciprocal_jet(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  Jet j = eval_jet(m, z, opts);
  return {j.F, j.dF, j.err_F, j.method};
}

TransformValue cauchy_eval(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  if (!(z.imag() > 0.0)) throw DomainError("cauchy_eval requires Im z > 0");
  Jet j = eval_jet(m, z, opts);
  return {j.G, j.err_G, j.method};
}

TransformValue reciprocal_cauchy_eval(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  if (!(z.imag() > 0.0)) throw DomainError("reciprocal_cauchy_eval requires Im z > 0");
  Jet j = eval_jet(m, z, opts);
  return {j.F, j.err_F, j.method};
}

// ---------------------------------------------------------------------------
// Newton continuation for F^{-1}
// ---------------------------------------------------------------------------

namespace {

struct NewtonState {
  Complex v;
  Complex omega;
  ReciprocalJetValue jet;
};

class Inverter {
 public:
  Inverter(const MeasureSpec& m, const TransformOptions& o) : m_(m), o_(o) {}

  int iterations = 0;
  int steps = 0;

  // Newton from `seed` for F(omega) = v. Returns false on divergence or evaluation failure.
  bool solve(Complex v, Complex seed, double tol, NewtonState& out) {
    Complex omega = seed;
    ReciprocalJetValue J;
    if (!eval(omega, J)) return false;
    double res = std::abs(J.F - v);
    for (int it = 0; it < o_.newton_max_iter; ++it) {
      if (res <= tol) {
        out = {v, omega, J};
        return true;
      }
      ++iterations;
      if (!(std::abs(J.dF) > 1e-300)) return false;
      Complex delta = (J.F - v) / J.dF;
      double lambda = 1.0;
      bool moved = false;
      for (int h = 0; h < 12; ++h, lambda *= 0.5) {
        Complex trial = omega - lambda * delta;
        ReciprocalJetValue Jt;
        if (!eval(trial, Jt)) continue;
        double rt = std::abs(Jt.F - v);
        if (rt < res) {
          omega = trial;
          J = Jt;
          res = rt;
          moved = true;
          break;
        }
      }
      if (!moved) {
        // Stalled at the evaluation noise floor.
        if (std::abs(delta) <= 1e-13 * (1.0 + std::abs(omega)) && res <= 1e2 * tol) {
          out = {v, omega, J};
          return true;
        }
        return false;
      }
      if (std::abs(omega - v) > 1e8 * (1.0 + std::abs(v))) return false;
    }
    if (res <= tol) {
      out = {v, omega, J};
      return true;
    }
    return false;
  }

  bool advance(NewtonState& cur, Complex v_next, double tol, int depth) {
    Complex seed = cur.omega;
    if (std::abs(cur.jet.dF) > 1e-300) seed += (v_next - cur.v) / cur.jet.dF;
    NewtonState next;
    ++steps;
    if (solve(v_next, seed, tol, next)) {
      cur = next;
      return true;
    }
    if (depth >= o_.max_bisections) return false;
    Complex mid = cur.v * std::sqrt(v_next / cur.v);
    double loose = std::max(tol, 1e-9 * (1.0 + std::abs(mid)));
    if (!advance(cur, mid, loose, depth + 1)) return false;
    return advance(cur, v_next, tol, depth + 1);
  }

 private:
  bool eval(Complex z, ReciprocalJetValue& J) {
    try {
      J = reciprocal_jet(m_, z, o_);
    } catch (const Error&) {
      return false;
    }
    return finite(J.F) && finite(J.dF);
  }

  const MeasureSpec& m_;
  const TransformOptions& o_;
};

double first_moment_guess(const MeasureSpec& m) {
  try {
    if (m.jacobi) return m.jacobi->alpha_d(0);
    if (m.moments && m.moments->order() >= 1) return to_double((*m.moments)[1]);
  } catch (const Error&) {
  }
  return 0.0;
}

double path_fraction(double R, double reached, double target) {
  if (R <= target) return 0.0;
  return std::clamp(std::log(R / reached) / std::log(R / target), 0.0, 1.0);
}

}  // namespace

std::vector<RayInversionPoint> invert_along_ray(const MeasureSpec& m, const std::vector<Complex>& targets,
                                                const TransformOptions& opts) {
  std::vector<RayInversionPoint> out(targets.size());
  if (targets.empty()) return out;
  if (!m.supports_cauchy()) throw UnsupportedRepresentationError(m.name + " has no representation that evaluates F");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    Complex w = targets[i];
    if (!(w.imag() > 0.0) || !finite(w)) throw DomainError("F^{-1} requires Im w > 0");
    if (i > 0) {
      Complex prev = targets[i - 1];
      if (std::abs(w) > std::abs(prev) || std::abs(w / std::abs(w) - prev / std::abs(prev)) > 1e-12)
        throw DomainError("ray targets must share one direction and have decreasing modulus");
    }
  }
  Inverter inv(m, opts);
  const double first = std::abs(targets.front());
  const double last = std::abs(targets.back());
  const double R = std::max(opts.continuation_radius, first);
  const Complex unit = targets.front() / first;
  auto fail_from = [&](std::size_t i, const std::string& why, double reached) {
    for (std::size_t k = i; k < targets.size(); ++k) {
      out[k].ok = false;
      out[k].error = why;
      out[k].reached = reached;
    }
  };
  auto record = [&](std::size_t i, const NewtonState& st) {
    out[i].ok = true;
    out[i].result.z = st.omega;
    out[i].result.residual = std::abs(st.jet.F - targets[i]);
    out[i].result.continuation_steps = inv.steps;
    out[i].result.newton_iterations = inv.iterations;
    out[i].jet = st.jet;
    out[i].reached = 1.0;
  };
  auto tol_for = [&](Complex v) { return opts.newton_tol * (1.0 + std::abs(v)); };
  auto loose_for = [&](Complex v) { return std::max(tol_for(v), 1e-9 * (1.0 + std::abs(v))); };

  Complex v0 = R * unit;
  NewtonState cur;
  bool start_is_target = R == first;
  if (!inv.solve(v0, v0 + first_moment_guess(m), start_is_target ? tol_for(v0) : loose_for(v0), cur)) {
    fail_from(0, "Newton iteration failed at the start of the continuation path", 0.0);
    return out;
  }
  if (!start_is_target) {
    int n = opts.continuation_steps;
    for (int k = 1; k < n; ++k) {
      Complex v = unit * (R * std::pow(first / R, static_cast<double>(k) / n));
      if (!inv.advance(cur, v, loose_for(v), 0)) {
        fail_from(0, "Newton continuation broke down at |w| = " + format_double(std::abs(cur.v)),
                  path_fraction(R, std::abs(cur.v), last));
        return out;
      }
    }
    if (!inv.advance(cur, targets.front(), tol_for(targets.front()), 0)) {
      fail_from(0, "Newton continuation broke down at |w| = " + format_double(std::abs(cur.v)),
                path_fraction(R, std::abs(cur.v), last));
      return out;
    }
  }
  record(0, cur);
  for (std::size_t i = 1; i < targets.size(); ++i) {
    if (targets[i] == cur.v) {
      record(i, cur);
      continue;
    }
    if (!inv.advance(cur, targets[i], tol_for(targets[i]), 0)) {
      fail_from(i, "Newton continuation broke down at |w| = " + format_double(std::abs(cur.v)),
                path_fraction(R, std::abs(cur.v), last));
      return out;
    }
    record(i, cur);
  }
  return out;
}

InversionResult invert_reciprocal_cauchy_detailed(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  if (!(w.imag() > 0.0) || !finite(w)) throw DomainError("F^{-1} requires Im w > 0");
  auto r = invert_along_ray(m, {w}, opts);
  if (!r[0].ok) throw InversionError(r[0].error + " (target w = " + format_complex(w) + ")", r[0].reached, Complex{});
  return r[0].result;
}

Complex invert_reciprocal_cauchy(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  return invert_reciprocal_cauchy_detailed(m, w, opts).z;
}

TransformValue free_cumulant_transform_eval(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  if (!(w.imag() < 0.0)) throw DomainError("C requires Im w < 0");
  Complex v = 1.0 / w;
  auto r = invert_reciprocal_cauchy_detailed(m, v, opts);
  auto J = reciprocal_jet(m, r.z, opts);
  double dz = (r.residual + J.est_error) / std::max(std::abs(J.dF), 1e-300);
  return {w * r.z - 1.0, std::abs(w) * dz, Method::NewtonInversion};
}

namespace {

TransformValue cprime_plain(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  if (!(w.imag() < 0.0)) throw DomainError("C' requires Im w < 0");
  Complex v = 1.0 / w;
  auto r = invert_reciprocal_cauchy_detailed(m, v, opts);
  auto J = reciprocal_jet(m, r.z, opts);
  if (std::abs(J.dF) < 1e-12)
    throw DerivativeSingularityError("|F'(omega)| < 1e-12 at omega = " + format_complex(r.z));
  Complex value = r.z - v / J.dF;
  double dz = (r.residual + J.est_error) / std::abs(J.dF);
  return {value, dz * (1.0 + std::abs(v / (J.dF * J.dF))) + dz, Method::NewtonInversion};
}

Complex contour_derivative(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  double h = std::min(1e-3 * std::max(1.0, std::abs(w)), 0.5 * std::abs(w.imag()));
  constexpr int M = 16;
  Complex acc{0.0, 0.0};
  for (int k = 0; k < M; ++k) {
    Complex e = std::polar(1.0, 2.0 * kPi * k / M);
    acc += free_cumulant_transform_eval(m, w + h * e, opts).value / e;
  }
  return acc / (static_cast<double>(M) * h);
}

}  // namespace

TransformValue free_cumulant_transform_derivative_eval(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  TransformValue out = cprime_plain(m, w, opts);
  if (opts.cross_validate) {
    Complex alt = contour_derivative(m, w, opts);
    double gap = std::abs(alt - out.value);
    if (gap > opts.cross_validate_tol * std::max(1.0, std::abs(out.value)))
      throw InversionUnstableError("C' disagrees with the contour derivative of C at w = " + format_complex(w) +
                                   " (gap " + format_double(gap) + ")");
    out.est_error = std::max(out.est_error, gap);
  }
  return out;
}

double cprime_contour_discrepancy(const MeasureSpec& m, Complex w, const TransformOptions& opts) {
  TransformOptions o = opts;
  o.cross_validate = false;
  return std::abs(cprime_plain(m, w, o).value - contour_derivative(m, w, o));
}

TransformValue voiculescu_eval(const MeasureSpec& m, Complex z, const TransformOptions& opts) {
  auto r = invert_reciprocal_cauchy_detailed(m, z, opts);
  return {r.z - z, r.residual, Method::NewtonInversion};
}

double cumulant_origin_defect(const MeasureSpec& m, double v, const TransformOptions& opts) {
  return std::abs(free_cumulant_transform_eval(m, Complex(0.0, -v), opts).value);
}

double normalization_defect(const MeasureSpec& m, double y, const TransformOptions& opts) {
  Complex z(0.0, y);
  return std::abs(z * cauchy_eval(m, z, opts).value - 1.0);
}

// ---------------------------------------------------------------------------
// Stieltjes inversion
// ---------------------------------------------------------------------------

StieltjesResult stieltjes_inversion(const std::function<Complex(Complex)>& g, double x, const StieltjesOptions& opts) {
  if (!(opts.y0 > 0.0) || opts.levels < 1) throw DomainError("Stieltjes inversion needs y0 > 0 and levels >= 1");
  std::vector<std::vector<double>> T;
  StieltjesResult best;
  best.est_error = std::numeric_limits<double>::infinity();
  double y = opts.y0;
  for (int k = 0; k < opts.levels; ++k, y *= 0.5) {
    double f;
    try {
      Complex v = g(Complex(x, y));
      if (!finite(v)) break;
      f = -v.imag() / kPi;
    } catch (const Error&) {
      break;
    }
    std::vector<double> row{f};
    for (int j = 1; j <= k && j <= 10; ++j) {
      double r = row[j - 1] + (row[j - 1] - T[k - 1][j - 1]) / (std::ldexp(1.0, j) - 1.0);
      row.push_back(r);
      // Agreement with the neighbouring column and with the same column one level up;
      // a 1/y blow-up passes the first test but never the second.
      double err = std::abs(r - row[j - 1]);
      if (j < static_cast<int>(T[k - 1].size())) err = std::max(err, std::abs(r - T[k - 1][j]));
      else continue;
      if (err < best.est_error) {
        best.value = r;
        best.est_error = err;
        best.levels_used = k + 1;
        best.y_min = y;
      }
    }
    T.push_back(std::move(row));
    if (best.est_error <= opts.rel_tol * std::abs(best.value) + opts.abs_tol) break;
  }
  if (T.empty()) throw InversionUnstableError("transform could not be evaluated near x = " + format_double(x));
  if (T.size() == 1) {
    best.value = T[0][0];
    best.est_error = std::abs(T[0][0]);
    best.levels_used = 1;
    best.y_min = opts.y0;
  }
  if (!(best.est_error <= opts.max_error * std::max(1.0, std::abs(best.value))))
    throw InversionUnstableError("Richardson extrapolation did not settle at x = " + format_double(x));
  return best;
}

}  // namespace freeprob
