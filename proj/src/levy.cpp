#include "freeprob/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "freeprob/numerics.hpp"

namespace freeprob {

namespace {

Rational from_double(double x) {
  if (!std::isfinite(x)) throw QuadratureError("non-finite value in Levy data");
  return Rational(x);
}

std::vector<double> with_cuts(std::vector<double> bps, std::initializer_list<double> extra) {
  bps.insert(bps.end(), extra.begin(), extra.end());
  return bps;
}

void merge_atom(std::map<Rational, Rational>& acc, const Rational& x, const Rational& m) {
  if (m == 0) return;
  acc[x] += m;
}

std::vector<Atom> atoms_of(const std::map<Rational, Rational>& acc) {
  std::vector<Atom> out;
  for (const auto& [x, m] : acc) out.push_back({x, m});
  return out;
}

// -log(1 - u) - u, accurate for small u.
Complex log_remainder(Complex u) {
  if (std::abs(u) < 0.1) {
    Complex term = u * u;
    Complex sum = 0.0;
    for (int n = 2; n < 40; ++n) {
      sum += term / static_cast<double>(n);
      term *= u;
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
  }
  return -std::log(1.0 - u) - u;
}

// Correction kernel of the triplet/pair conversion, weighted per unit of k.
double pair_correction_kernel(double t, double k) {
  if (t == 0.0) return 0.0;
  double s = t > 0 ? 1.0 : -1.0;
  double q = 1.0 + t * t;
  return std::fabs(t) <= 1.0 ? s * k * t * t / q : -s * k / q;
}

double continuous_correction(const LevyMeasure& nu, double tol) {
  if (!nu.has_continuous()) return 0.0;
  auto f = [&](double t) { return t == 0.0 ? 0.0 : pair_correction_kernel(t, nu.k(t)); };
  return numerics::integrate(f, nu.lo, nu.hi, tol, with_cuts(nu.breakpoints, {-1.0, 0.0, 1.0})).value;
}

Rational atom_correction(const Atom& a) {
  Rational t = a.x;
  Rational q = 1 + t * t;
  Rational indicator = (t >= -1 && t <= 1) ? Rational(1) : Rational(0);
  return a.mass * t * (indicator - 1 / q);
}

// Fubini weight of eta for a Nevanlinna atom at y != 0.
Rational nevanlinna_eta_weight(const Rational& y) {
  if (y >= -1 && y <= 1) return y;
  Rational ay = y > 0 ? y : Rational(-y);
  Rational v = (1 + y * y - ay) / (y * y);
  return y > 0 ? v : Rational(-v);
}

double nevanlinna_eta_weight_d(double y) {
  if (std::fabs(y) <= 1.0) return y;
  double v = (1.0 + y * y - std::fabs(y)) / (y * y);
  return y > 0 ? v : -v;
}

// (1+y^2)/y^2 * int_0^y (1/(1-wx) - 1 - wx 1_[-1,1](x)) dx/|x| in closed form.
Complex nevanlinna_inner(double y, Complex w) {
  Complex u = w * y;
  double s = y > 0 ? 1.0 : -1.0;
  double q = (1.0 + y * y) / (y * y);
  if (std::fabs(y) <= 1.0) return q * log_remainder(u);
  return q * (log_remainder(u) + u - w * s);
}

Complex lk_kernel(double x, Complex w) {
  Complex u = w * x;
  return std::fabs(x) <= 1.0 ? u * u / (1.0 - u) : u / (1.0 - u);
}

}  // namespace

// ---------------------------------------------------------------------------
// Measure descriptors
// ---------------------------------------------------------------------------

Rational FiniteMeasure::atom_mass_at(const Rational& x) const {
  Rational m = 0;
  for (const auto& a : atoms)
    if (a.x == x) m += a.mass;
  return m;
}

Rational FiniteMeasure::atom_mass() const {
  Rational m = 0;
  for (const auto& a : atoms) m += a.mass;
  return m;
}

double FiniteMeasure::total_mass(double tol) const {
  double m = to_double(atom_mass());
  if (density) m += numerics::integrate(density, lo, hi, tol, with_cuts(breakpoints, {0.0})).value;
  return m;
}

FiniteMeasure FiniteMeasure::from_atoms(std::vector<Atom> atoms) {
  FiniteMeasure m;
  for (const auto& a : atoms)
    if (a.mass < 0) throw DomainError("atom masses must be non-negative");
  m.atoms = std::move(atoms);
  return m;
}

LevyMeasure LevyMeasure::zero() { return {}; }

LevyMeasure LevyMeasure::from_atoms(std::vector<Atom> atoms) {
  LevyMeasure nu;
  for (const auto& a : atoms) {
    if (a.x == 0) throw DomainError("a free Levy measure has no mass at 0");
    if (a.mass <= 0) throw DomainError("Levy atoms must have positive mass");
  }
  nu.atoms = std::move(atoms);
  nu.form = nu.atoms.empty() ? LevyForm::Zero : LevyForm::Atoms;
  return nu;
}

LevyMeasure LevyMeasure::from_k(std::function<double(double)> k, double lo, double hi,
                                std::vector<double> breakpoints) {
  LevyMeasure nu;
  nu.form = LevyForm::KFunction;
  nu.k = std::move(k);
  nu.lo = lo;
  nu.hi = hi;
  nu.breakpoints = std::move(breakpoints);
  return nu;
}

LevyMeasure LevyMeasure::from_density(std::function<double(double)> d, double lo, double hi,
                                      std::vector<double> breakpoints) {
  LevyMeasure nu;
  nu.form = LevyForm::Density;
  nu.k = [d = std::move(d)](double x) { return std::fabs(x) * d(x); };
  nu.lo = lo;
  nu.hi = hi;
  nu.breakpoints = std::move(breakpoints);
  return nu;
}

// ---------------------------------------------------------------------------
// Triplet <-> pair
// ---------------------------------------------------------------------------

GeneratingPair pair_from_triplet(const FreeCharacteristicTriplet& t, double tol) {
  if (t.a < 0) throw DomainError("Gaussian part a must be non-negative");
  GeneratingPair p;
  std::map<Rational, Rational> acc;
  merge_atom(acc, Rational(0), t.a);
  Rational gamma = t.eta;
  for (const auto& a : t.nu.atoms) {
    if (a.x == 0) throw DomainError("a free Levy measure has no mass at 0");
    merge_atom(acc, a.x, a.mass * a.x * a.x / (1 + a.x * a.x));
    gamma -= atom_correction(a);
  }
  p.sigma.atoms = atoms_of(acc);
  if (t.nu.has_continuous()) {
    auto k = t.nu.k;
    p.sigma.density = [k](double x) {
      if (x == 0.0) return 0.0;
      return std::fabs(x) * k(x) / (1.0 + x * x);
    };
    p.sigma.lo = t.nu.lo;
    p.sigma.hi = t.nu.hi;
    p.sigma.breakpoints = t.nu.breakpoints;
    gamma -= from_double(continuous_correction(t.nu, tol));
  }
  p.gamma = gamma;
  return p;
}

FreeCharacteristicTriplet triplet_from_pair(const GeneratingPair& p, double tol) {
  FreeCharacteristicTriplet t;
  t.a = p.sigma.atom_mass_at(Rational(0));
  std::vector<Atom> nu_atoms;
  std::map<Rational, Rational> acc;
  for (const auto& a : p.sigma.atoms) {
    if (a.x == 0) continue;
    merge_atom(acc, a.x, a.mass * (1 + a.x * a.x) / (a.x * a.x));
  }
  nu_atoms = atoms_of(acc);
  if (p.sigma.has_density()) {
    auto s = p.sigma.density;
    t.nu = LevyMeasure::from_k(
        [s](double x) { return x == 0.0 ? 0.0 : (1.0 + x * x) * s(x) / std::fabs(x); }, p.sigma.lo,
        p.sigma.hi, p.sigma.breakpoints);
    t.nu.form = LevyForm::Density;
    t.nu.atoms = nu_atoms;
  } else {
    t.nu = LevyMeasure::from_atoms(nu_atoms);
  }
  Rational eta = p.gamma;
  for (const auto& a : t.nu.atoms) eta += atom_correction(a);
  if (t.nu.has_continuous()) eta += from_double(continuous_correction(t.nu, tol));
  t.eta = eta;
  return t;
}

// ---------------------------------------------------------------------------
// Nevanlinna data
// ---------------------------------------------------------------------------

double k_from_rho(const FiniteMeasure& rho, double x, double tol) {
  if (x == 0.0 || !std::isfinite(x)) throw DomainError("k is defined for finite x != 0");
  Rational xq(x);
  double k = 0.0;
  for (const auto& a : rho.atoms) {
    bool in_tail = x > 0 ? a.x >= xq : a.x <= xq;
    if (in_tail && a.x != 0) k += to_double(Rational(a.mass * (1 + a.x * a.x) / (a.x * a.x)));
  }
  if (rho.has_density()) {
    auto f = [&](double y) { return (1.0 + y * y) / (y * y) * rho.density(y); };
    double v = 0.0;
    if (x > 0 && rho.hi > x)
      v = numerics::integrate(f, std::max(x, rho.lo), rho.hi, tol, rho.breakpoints).value;
    else if (x < 0 && rho.lo < x)
      v = numerics::integrate(f, rho.lo, std::min(x, rho.hi), tol, rho.breakpoints).value;
    if (!std::isfinite(v) || v < 0) throw DomainError("tail integral of rho diverges");
    k += v;
  }
  return k;
}

FreeCharacteristicTriplet triplet_from_nevanlinna(const NevanlinnaPair& p, double tol) {
  FreeCharacteristicTriplet t;
  t.a = p.rho.atom_mass_at(Rational(0)) / 2;
  Rational eta = p.xi;
  bool continuous = false;
  double lo = 0.0, hi = 0.0;
  std::vector<double> bps;
  for (const auto& a : p.rho.atoms) {
    if (a.x == 0) continue;
    continuous = true;
    eta += a.mass * nevanlinna_eta_weight(a.x);
    double x = to_double(a.x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    bps.push_back(x);
  }
  if (p.rho.has_density()) {
    continuous = true;
    lo = std::min(lo, p.rho.lo);
    hi = std::max(hi, p.rho.hi);
    bps.insert(bps.end(), p.rho.breakpoints.begin(), p.rho.breakpoints.end());
    auto f = [&](double y) { return nevanlinna_eta_weight_d(y) * p.rho.density(y); };
    eta += from_double(numerics::integrate(f, p.rho.lo, p.rho.hi, tol,
                                           with_cuts(p.rho.breakpoints, {-1.0, 0.0, 1.0}))
                           .value);
  }
  t.eta = eta;
  if (!continuous) {
    t.nu = LevyMeasure::zero();
    return t;
  }
  auto rho = std::make_shared<const FiniteMeasure>(p.rho);
  t.nu = LevyMeasure::from_k([rho, tol](double x) { return k_from_rho(*rho, x, tol); }, lo, hi, bps);
  t.nu.form = LevyForm::Nevanlinna;
  t.nu.rho = rho;
  t.nu.declared_monotone = true;
  return t;
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

Complex levy_khintchine_eval(const FreeCharacteristicTriplet& t, Complex w, double tol) {
  Complex value = to_double(t.a) * w * w + to_double(t.eta) * w;
  for (const auto& a : t.nu.atoms) value += to_double(a.mass) * lk_kernel(to_double(a.x), w);
  if (!t.nu.has_continuous()) return value;
  if (t.nu.rho) {
    const FiniteMeasure& rho = *t.nu.rho;
    for (const auto& a : rho.atoms)
      if (a.x != 0) value += to_double(a.mass) * nevanlinna_inner(to_double(a.x), w);
    if (rho.has_density()) {
      auto f = [&](double y) { return y == 0.0 ? 0.5 * w * w * rho.density(0.0) : nevanlinna_inner(y, w) * rho.density(y); };
      value += numerics::integrate_complex(f, rho.lo, rho.hi, tol, with_cuts(rho.breakpoints, {-1.0, 0.0, 1.0})).value;
    }
    return value;
  }
  auto f = [&](double x) { return x == 0.0 ? Complex(0.0) : lk_kernel(x, w) * t.nu.k(x) / std::fabs(x); };
  value += numerics::integrate_complex(f, t.nu.lo, t.nu.hi, tol,
                                       with_cuts(t.nu.breakpoints, {-1.0, 0.0, 1.0}))
               .value;
  return value;
}

Complex voiculescu_from_pair_eval(const GeneratingPair& p, Complex z, double tol) {
  if (!(z.imag() > 0.0)) throw DomainError("voiculescu_from_pair_eval needs Im z > 0");
  Complex value = to_double(p.gamma);
  for (const auto& a : p.sigma.atoms) {
    double x = to_double(a.x);
    value += to_double(a.mass) * (1.0 + x * z) / (z - x);
  }
  if (p.sigma.has_density()) {
    auto f = [&](double x) { return (1.0 + x * z) / (z - x) * p.sigma.density(x); };
    value += numerics::integrate_complex(f, p.sigma.lo, p.sigma.hi, tol,
                                         with_cuts(p.sigma.breakpoints, {0.0, z.real()}))
                 .value;
  }
  return value;
}

double levy_integrability(const LevyMeasure& nu, double tol) {
  double total = 0.0;
  for (const auto& a : nu.atoms) {
    double x = to_double(a.x);
    total += to_double(a.mass) * std::min(1.0, x * x);
  }
  if (nu.has_continuous()) {
    auto f = [&](double x) { return x == 0.0 ? 0.0 : std::min(1.0, x * x) * nu.k(x) / std::fabs(x); };
    auto r = numerics::integrate(f, nu.lo, nu.hi, tol, with_cuts(nu.breakpoints, {-1.0, 0.0, 1.0}));
    if (!std::isfinite(r.value)) throw DomainError("int min(1, x^2) nu(dx) diverges");
    // A convergent integral puts vanishing mass in far decades; a logarithmic divergence
    // puts the same mass in each of them, which quadrature alone cannot see.
    auto decade = [&](double a, double b) {
      double lo = std::max(a, nu.lo), hi = std::min(b, nu.hi);
      return lo < hi ? std::fabs(numerics::integrate(f, lo, hi, 1e-8).value) : 0.0;
    };
    double far = decade(1e11, 1e12) + decade(-1e12, -1e11) + decade(1e-12, 1e-11) + decade(-1e-11, -1e-12);
    if (far > 1e-3 * std::max(1.0, std::fabs(r.value)))
      throw DomainError("int min(1, x^2) nu(dx) diverges");
    total += r.value;
  }
  return total;
}

std::vector<double> free_cumulants_from_triplet(const FreeCharacteristicTriplet& t, std::size_t N,
                                                double tol) {
  std::vector<double> out(N, 0.0);
  auto moment = [&](int n, bool outside_only) {
    double v = 0.0;
    for (const auto& a : t.nu.atoms) {
      double x = to_double(a.x);
      if (!outside_only || std::fabs(x) > 1.0) v += to_double(a.mass) * std::pow(x, n);
    }
    if (t.nu.has_continuous()) {
      auto f = [&](double x) {
        if (x == 0.0 || (outside_only && std::fabs(x) <= 1.0)) return 0.0;
        return std::pow(x, n) * t.nu.k(x) / std::fabs(x);
      };
      v += numerics::integrate(f, t.nu.lo, t.nu.hi, tol, with_cuts(t.nu.breakpoints, {-1.0, 0.0, 1.0})).value;
    }
    return v;
  };
  if (N >= 1) out[0] = to_double(t.eta) + moment(1, true);
  if (N >= 2) out[1] = to_double(t.a) + moment(2, false);
  for (std::size_t n = 3; n <= N; ++n) out[n - 1] = moment(static_cast<int>(n), false);
  return out;
}

// ---------------------------------------------------------------------------
// Monotone-k criterion
// ---------------------------------------------------------------------------

namespace {

struct SweepResult {
  double worst = -std::numeric_limits<double>::infinity();
  double x1 = 0.0, x2 = 0.0, k1 = 0.0, k2 = 0.0;
  std::size_t samples = 0;
};

// Samples x_0 < x_1 < ... and records the largest violation of the required direction.
// `increasing_ok` is true on the negative half-line.
void sweep(const std::function<double(double)>& k, const std::vector<double>& xs, bool increasing_ok,
           const MonotonicityOptions& opts, SweepResult& res) {
  if (xs.size() < 2) return;
  std::vector<double> ks(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) ks[i] = k(xs[i]);
  res.samples += xs.size();
  auto violation = [&](double ka, double kb) { return increasing_ok ? ka - kb : kb - ka; };
  auto consider = [&](double xa, double xb, double ka, double kb) {
    double v = violation(ka, kb);
    double allowed = opts.abs_tol + opts.rel_tol * std::max(std::fabs(ka), std::fabs(kb));
    double excess = v - allowed;
    if (excess > res.worst) {
      res.worst = excess;
      res.x1 = xa;
      res.x2 = xb;
      res.k1 = ka;
      res.k2 = kb;
    }
  };
  std::vector<double> diffs(xs.size() - 1);
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    diffs[i] = ks[i + 1] - ks[i];
    consider(xs[i], xs[i + 1], ks[i], ks[i + 1]);
  }
  // Refine where successive differences change sign.
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    if ((diffs[i - 1] > 0 && diffs[i] < 0) || (diffs[i - 1] < 0 && diffs[i] > 0)) {
      double a = xs[i - 1], b = xs[i + 1];
      double prev_x = a, prev_k = ks[i - 1];
      for (int r = 1; r <= opts.refine_points; ++r) {
        double x = a + (b - a) * r / (opts.refine_points + 1.0);
        double kx = k(x);
        consider(prev_x, x, prev_k, kx);
        prev_x = x;
        prev_k = kx;
      }
      consider(prev_x, b, prev_k, ks[i + 1]);
      res.samples += static_cast<std::size_t>(opts.refine_points);
    }
  }
}

}  // namespace

CheckReport fsd_monotonicity_check(const LevyMeasure& nu, const MonotonicityOptions& opts) {
  CheckReport r;
  r.check = "fsd_monotonicity";
  r.sampled = true;
  r.tolerance = 0.0;
  r.details["form"] = to_json(nu)["form"];
  if (nu.declared_monotone) r.details["declared_monotone"] = *nu.declared_monotone;
  if (!nu.atoms.empty()) {
    const Atom& a = nu.atoms.front();
    r.sampled = false;
    r.verdict = Verdict::Fail;
    r.margin = to_double(a.mass);
    r.witness = Complex(to_double(a.x), 0.0);
    r.evaluated = nu.atoms.size();
    r.statement = "not of the form k(x)/|x| dx: the Levy measure has an atom at " + a.x.get_str() +
                  " (mass " + a.mass.get_str() + ")";
    r.details["atom"] = {{"x", to_json(a.x)}, {"mass", to_json(a.mass)}};
    return r;
  }
  if (!nu.has_continuous()) {
    r.sampled = false;
    r.verdict = Verdict::Pass;
    r.margin = 0.0;
    r.statement = "zero Levy measure: k vanishes identically";
    return r;
  }

  std::vector<double> grid;
  int total = (opts.max_exponent - opts.min_exponent) * opts.per_octave;
  for (int j = 0; j <= total; ++j)
    grid.push_back(std::exp2(opts.min_exponent + static_cast<double>(j) / opts.per_octave));

  SweepResult pos, neg;
  if (nu.hi > 0.0) {
    std::vector<double> xs;
    // Sampling runs a little past the support edge so a drop to zero is seen.
    for (double x : grid)
      if (!std::isfinite(nu.hi) || x <= 2.0 * nu.hi) xs.push_back(x);
    sweep(nu.k, xs, false, opts, pos);
  }
  if (nu.lo < 0.0) {
    std::vector<double> xs;
    for (auto it = grid.rbegin(); it != grid.rend(); ++it)
      if (!std::isfinite(nu.lo) || *it <= -2.0 * nu.lo) xs.push_back(-*it);
    sweep(nu.k, xs, true, opts, neg);
  }
  r.evaluated = pos.samples + neg.samples;
  const SweepResult& worst = pos.worst >= neg.worst ? pos : neg;
  bool positive_side = pos.worst >= neg.worst;
  r.margin = worst.worst;
  if (worst.worst > 0.0) {
    r.verdict = Verdict::Fail;
    r.witness = Complex(worst.x1, 0.0);
    r.statement = positive_side ? "not FSD form: k increases on (0, inf) between the witness points"
                                : "not FSD form: k decreases on (-inf, 0) between the witness points";
    r.details["witness_pair"] = {{"x1", worst.x1}, {"x2", worst.x2}, {"k1", worst.k1}, {"k2", worst.k2}};
  } else {
    r.verdict = Verdict::Pass;
    r.statement = "k is monotone in the required directions at every sampled point (sampled check)";
  }
  // Boundary behaviour of k near 0 and at infinity, reported as diagnostics.
  Json limits = Json::object();
  Json near0 = Json::array(), far = Json::array();
  for (double x : {1e-2, 1e-3, 1e-4}) {
    double v = 0.0;
    if (nu.hi > 0.0) v = std::max(v, x * x * nu.k(x));
    if (nu.lo < 0.0) v = std::max(v, x * x * nu.k(-x));
    near0.push_back(v);
  }
  for (double x : {1e2, 1e3, 1e4}) {
    double v = 0.0;
    if (nu.hi > x || !std::isfinite(nu.hi)) v = std::max(v, nu.k(x) * std::log(x));
    if (nu.lo < -x || !std::isfinite(nu.lo)) v = std::max(v, nu.k(-x) * std::log(x));
    far.push_back(v);
  }
  limits["x2k_at_1e-2_1e-3_1e-4"] = near0;
  limits["klog_at_1e2_1e3_1e4"] = far;
  r.details["limits"] = limits;
  return r;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

Json atoms_json(const std::vector<Atom>& atoms) {
  Json a = Json::array();
  for (const auto& at : atoms) a.push_back({{"x", to_json(at.x)}, {"mass", to_json(at.mass)}});
  return a;
}

const char* form_name(LevyForm f) {
  switch (f) {
    case LevyForm::Zero:
      return "zero";
    case LevyForm::Atoms:
      return "atoms";
    case LevyForm::KFunction:
      return "k-over-abs-x";
    case LevyForm::Density:
      return "density";
    case LevyForm::Nevanlinna:
      return "k-from-rho";
  }
  return "zero";
}

}  // namespace

Json to_json(const FiniteMeasure& m) {
  Json j = Json::object();
  j["atoms"] = atoms_json(m.atoms);
  if (m.has_density())
    j["density"] = {{"support", Json::array({m.lo, m.hi})}};
  else
    j["density"] = nullptr;
  return j;
}

Json to_json(const LevyMeasure& nu) {
  Json j = Json::object();
  j["form"] = form_name(nu.form);
  j["atoms"] = atoms_json(nu.atoms);
  if (nu.has_continuous())
    j["support"] = Json::array({nu.lo, nu.hi});
  return j;
}

Json to_json(const FreeCharacteristicTriplet& t) {
  Json j = Json::object();
  j["a"] = to_json(t.a);
  j["eta"] = to_json(t.eta);
  j["nu"] = to_json(t.nu);
  return j;
}

Json to_json(const GeneratingPair& p) {
  Json j = Json::object();
  j["gamma"] = to_json(p.gamma);
  j["sigma"] = to_json(p.sigma);
  return j;
}

Json to_json(const NevanlinnaPair& p) {
  Json j = Json::object();
  j["xi"] = to_json(p.xi);
  j["rho"] = to_json(p.rho);
  return j;
}

}  // namespace freeprob
