#include <algorithm>
#include <cmath>
#include <limits>

#include "freeprob/awk.hpp"
#include "freeprob/measures.hpp"
#include "freeprob/numerics.hpp"

namespace freeprob {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Defaults = std::vector<std::pair<std::string, Rational>>;

struct Family {
  std::string name;
  Defaults defaults;
};

const std::vector<Family>& families() {
  static const std::vector<Family> f = {
      {"semicircle", {{"a", Rational(0)}, {"r", Rational(2)}}},
      {"gaussian", {{"mean", Rational(0)}, {"variance", Rational(1)}}},
      {"awk", {{"c", Rational(0)}}},
      {"free_meixner", {{"a", Rational(0)}, {"b", Rational(1)}, {"scale", Rational(1)}}},
      {"free_poisson", {{"lambda", Rational(1)}, {"alpha", Rational(1)}}},
      {"free_gamma", {{"c", Rational(1)}, {"alpha", Rational(1)}}},
      {"free_stable", {{"alpha", Rational(1)}, {"c_plus", Rational(1)}, {"c_minus", Rational(1)}, {"eta", Rational(0)}}},
      {"student_t3", {}},
      {"dirac", {{"a", Rational(0)}}},
      {"bernoulli", {}},
  };
  return f;
}

ParamRecord resolve(const Family& fam, const ParamRecord& given) {
  ParamRecord out;
  for (const auto& [k, v] : fam.defaults) out[k] = v;
  for (const auto& [k, v] : given) {
    if (!out.count(k)) throw DomainError("unknown parameter '" + k + "' for " + fam.name);
    out[k] = v;
  }
  return out;
}

// Interval containing every eigenvalue of the (infinite) Jacobi matrix.
std::pair<double, double> gershgorin(const JacobiCoefficients& j) {
  std::size_t n = std::max(j.alpha_head().size(), j.beta_head().size()) + 2;
  if (j.extent() == JacobiCoefficients::Extent::Terminating) n = j.alpha_head().size();
  double lo = kInf, hi = -kInf;
  for (std::size_t k = 0; k < n; ++k) {
    double r = 0.0;
    if (k >= 1) r += std::sqrt(j.beta_d(k));
    if (k + 1 < n || j.extent() != JacobiCoefficients::Extent::Terminating) r += std::sqrt(j.beta_d(k + 1));
    lo = std::min(lo, j.alpha_d(k) - r);
    hi = std::max(hi, j.alpha_d(k) + r);
  }
  return {lo, hi};
}

void finish_from_jacobi(MeasureSpec& m) {
  m.closed_form = closed_form_from_jacobi(*m.jacobi);
  m.compact_support = gershgorin(*m.jacobi);
}

MeasureSpec make_dirac(const Rational& a) {
  MeasureSpec m;
  m.name = "dirac";
  m.params = {{"a", a}};
  m.jacobi = JacobiCoefficients::terminating({a}, {});
  finish_from_jacobi(m);
  m.compact_support = std::make_pair(to_double(a), to_double(a));
  m.triplet = FreeCharacteristicTriplet{Rational(0), a, LevyMeasure::zero()};
  return m;
}

MeasureSpec semicircle(const ParamRecord& p) {
  Rational a = p.at("a"), r = p.at("r");
  if (r <= 0) throw DomainError("semicircle radius r must be positive");
  MeasureSpec m;
  m.name = "semicircle";
  m.params = p;
  Rational beta = r * r / 4;
  m.jacobi = JacobiCoefficients::with_tail({}, {}, {a, beta, Rational(0)});
  finish_from_jacobi(m);
  double ad = to_double(a), rd = to_double(r);
  m.compact_support = std::make_pair(ad - rd, ad + rd);
  DensitySpec d;
  d.lo = ad - rd;
  d.hi = ad + rd;
  d.pdf = [ad, rd](double t) {
    double u = rd * rd - (t - ad) * (t - ad);
    return u <= 0.0 ? 0.0 : 2.0 * std::sqrt(u) / (kPi * rd * rd);
  };
  d.breakpoints = {ad};
  m.density = d;
  m.triplet = FreeCharacteristicTriplet{beta, a, LevyMeasure::zero()};
  return m;
}

MeasureSpec gaussian(const ParamRecord& p) {
  Rational mean = p.at("mean"), var = p.at("variance");
  if (var <= 0) throw DomainError("gaussian variance must be positive");
  MeasureSpec m;
  m.name = "gaussian";
  m.params = p;
  m.jacobi = JacobiCoefficients::with_tail({}, {}, {mean, Rational(0), var});
  double md = to_double(mean), sd = std::sqrt(to_double(var));
  DensitySpec d;
  d.lo = -kInf;
  d.hi = kInf;
  d.pdf = [md, sd](double t) {
    double u = (t - md) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * kPi));
  };
  d.breakpoints = {md};
  m.density = d;
  m.riccati = RiccatiData{0.0, md, sd};
  return m;
}

MeasureSpec awk(const ParamRecord& p) {
  Rational c = p.at("c");
  if (c < -1) throw DomainError("AWK parameter must satisfy c >= -1");
  if (c == -1) {
    MeasureSpec m = make_dirac(Rational(0));
    m.name = "awk";
    m.params = p;
    return m;
  }
  MeasureSpec m;
  m.name = "awk";
  m.params = p;
  m.jacobi = JacobiCoefficients::with_tail({}, {}, {Rational(0), c, Rational(1)});
  double cd = to_double(c);
  m.riccati = RiccatiData{cd, 0.0, 1.0};
  if (cd >= 0.0) {
    DensitySpec d;
    d.lo = -kInf;
    d.hi = kInf;
    d.pdf = [cd](double t) { return awk_density(cd, t); };
    d.breakpoints = {0.0};
    m.density = d;
  }
  return m;
}

MeasureSpec free_meixner(const ParamRecord& p) {
  Rational a = p.at("a"), b = p.at("b"), s = p.at("scale");
  if (b < -1) throw DomainError("free Meixner parameter b must satisfy b >= -1");
  if (s <= 0) throw DomainError("free Meixner scale must be positive");
  MeasureSpec m;
  m.name = "free_meixner";
  m.params = p;
  if (b == -1)
    m.jacobi = JacobiCoefficients::terminating({Rational(0), s * a}, {s * s});
  else
    m.jacobi = JacobiCoefficients::with_tail({Rational(0)}, {s * s}, {s * a, s * s * (1 + b), Rational(0)});
  finish_from_jacobi(m);

  double ad = to_double(a), bd = to_double(b), sd = to_double(s);
  if (b > 0) {
    double lo = sd * (ad - 2.0 * std::sqrt(bd)), hi = sd * (ad + 2.0 * std::sqrt(bd));
    auto dens = [ad, bd, sd](double x) {
      double u = 4.0 * bd * sd * sd - (x - sd * ad) * (x - sd * ad);
      return u <= 0.0 || x == 0.0 ? 0.0 : std::sqrt(u) / (2.0 * kPi * bd * x * x);
    };
    std::vector<double> bp{0.0, -1.0, 1.0, sd * ad};
    LevyMeasure nu = LevyMeasure::from_density(dens, lo, hi, bp);
    // eta = -int_{|x|>1} x nu(dx) so that the first free cumulant vanishes.
    auto outside = [&](double x) { return std::abs(x) > 1.0 ? x * dens(x) : 0.0; };
    double eta = 0.0;
    if (hi > 1.0) eta -= numerics::integrate(outside, std::max(lo, 1.0), hi, 1e-13, bp).value;
    if (lo < -1.0) eta -= numerics::integrate(outside, lo, std::min(hi, -1.0), 1e-13, bp).value;
    m.triplet = FreeCharacteristicTriplet{Rational(0), Rational(eta), nu};
  } else if (b == 0) {
    if (a == 0) {
      m.triplet = FreeCharacteristicTriplet{s * s, Rational(0), LevyMeasure::zero()};
    } else {
      Rational x = s * a, mass = 1 / (a * a);
      Rational eta = abs(x) > 1 ? Rational(-x * mass) : Rational(0);
      m.triplet = FreeCharacteristicTriplet{Rational(0), eta, LevyMeasure::from_atoms({{x, mass}})};
    }
  }
  return m;
}

MeasureSpec free_poisson(const ParamRecord& p) {
  Rational lambda = p.at("lambda"), alpha = p.at("alpha");
  if (lambda <= 0) throw DomainError("free Poisson rate lambda must be positive");
  if (alpha == 0) throw DomainError("free Poisson jump size alpha must be non-zero");
  MeasureSpec m;
  m.name = "free_poisson";
  m.params = p;
  m.jacobi = JacobiCoefficients::with_tail({lambda * alpha}, {}, {alpha * (1 + lambda), lambda * alpha * alpha, Rational(0)});
  finish_from_jacobi(m);
  double ld = to_double(lambda), ad = to_double(alpha);
  double e1 = ad * (1.0 - std::sqrt(ld)) * (1.0 - std::sqrt(ld));
  double e2 = ad * (1.0 + std::sqrt(ld)) * (1.0 + std::sqrt(ld));
  DensitySpec d;
  d.lo = std::min(e1, e2);
  d.hi = std::max(e1, e2);
  d.pdf = [e1, e2, ad](double x) {
    double u = (e2 - x) * (x - e1);
    return u <= 0.0 || x == 0.0 ? 0.0 : std::sqrt(u) / (2.0 * kPi * std::abs(ad * x));
  };
  if (ld < 1.0) d.atoms.push_back({0.0, 1.0 - ld});
  m.density = d;
  Rational eta = abs(alpha) <= 1 ? Rational(lambda * alpha) : Rational(0);
  m.triplet = FreeCharacteristicTriplet{Rational(0), eta, LevyMeasure::from_atoms({{alpha, lambda}})};
  return m;
}

MeasureSpec free_gamma(const ParamRecord& p) {
  Rational c = p.at("c"), alpha = p.at("alpha");
  if (c <= 0 || alpha <= 0) throw DomainError("free gamma parameters c and alpha must be positive");
  MeasureSpec m;
  m.name = "free_gamma";
  m.params = p;
  double cd = to_double(c), ad = to_double(alpha);
  auto k = [cd, ad](double x) { return x > 0.0 ? cd * std::exp(-ad * x) : 0.0; };
  LevyMeasure nu = LevyMeasure::from_k(k, 0.0, kInf, {1.0});
  nu.declared_monotone = true;
  m.triplet = FreeCharacteristicTriplet{Rational(0), Rational(cd * -std::expm1(-ad) / ad), nu};
  m.finite_variance = true;
  return m;
}

MeasureSpec free_stable(const ParamRecord& p) {
  Rational alpha = p.at("alpha"), cp = p.at("c_plus"), cm = p.at("c_minus"), eta = p.at("eta");
  if (alpha <= 0 || alpha >= 2) throw DomainError("free stable index alpha must lie in (0, 2)");
  if (cp < 0 || cm < 0 || (cp == 0 && cm == 0)) throw DomainError("free stable weights must be non-negative and not both zero");
  MeasureSpec m;
  m.name = "free_stable";
  m.params = p;
  double a = to_double(alpha), cpd = to_double(cp), cmd = to_double(cm);
  auto k = [a, cpd, cmd](double x) {
    if (x > 0.0) return cpd * std::pow(x, -a);
    if (x < 0.0) return cmd * std::pow(-x, -a);
    return 0.0;
  };
  LevyMeasure nu = LevyMeasure::from_k(k, cmd > 0.0 ? -kInf : 0.0, cpd > 0.0 ? kInf : 0.0, {-1.0, 0.0, 1.0});
  nu.declared_monotone = true;
  m.triplet = FreeCharacteristicTriplet{Rational(0), eta, nu};
  m.finite_variance = false;
  return m;
}

MeasureSpec student_t3(const ParamRecord& p) {
  MeasureSpec m;
  m.name = "student_t3";
  m.params = p;
  DensitySpec d;
  d.lo = -kInf;
  d.hi = kInf;
  d.pdf = [](double t) {
    double u = 1.0 + t * t / 3.0;
    return 2.0 / (kPi * std::sqrt(3.0) * u * u);
  };
  d.breakpoints = {0.0};
  d.tail = TailModel{18.0 / (kPi * std::sqrt(3.0)), 4.0};
  d.truncation = 1e3;
  m.density = d;
  // The density is rational with double poles at +-i sqrt3; closing the contour below
  // leaves G(z) = (z + 2i sqrt3) / (z + i sqrt3)^2 on C+, continued as the same rational function.
  ClosedFormTransforms cf;
  cf.description = "(z + 2i sqrt3) / (z + i sqrt3)^2";
  cf.jet = [](Complex z) {
    const Complex s(0.0, std::sqrt(3.0));
    Complex u = z + s;
    return CauchyJet{(z + 2.0 * s) / (u * u), -(z + 3.0 * s) / (u * u * u)};
  };
  m.closed_form = cf;
  return m;
}

MeasureSpec bernoulli(const ParamRecord& p) {
  MeasureSpec m;
  m.name = "bernoulli";
  m.params = p;
  m.jacobi = JacobiCoefficients::terminating({Rational(0), Rational(0)}, {Rational(1)});
  finish_from_jacobi(m);
  m.compact_support = std::make_pair(-1.0, 1.0);
  return m;
}

}  // namespace

std::pair<double, double> jacobi_spectral_bounds(const JacobiCoefficients& j) {
  if (j.extent() == JacobiCoefficients::Extent::Truncated)
    throw UnsupportedRepresentationError("spectral bounds need terminating or tailed Jacobi data");
  if (j.tail() && j.tail()->beta_slope != 0)
    throw UnsupportedRepresentationError("unbounded Jacobi tail: support is not compact");
  return gershgorin(j);
}

std::vector<std::string> catalog_names() {
  std::vector<std::string> out;
  for (const auto& f : families()) out.push_back(f.name);
  return out;
}

MeasureSpec catalog_lookup(const std::string& name, const ParamRecord& params) {
  auto it = std::find_if(families().begin(), families().end(), [&](const Family& f) { return f.name == name; });
  if (it == families().end()) throw UnknownMeasureError("unknown catalog measure '" + name + "'");
  ParamRecord p = resolve(*it, params);
  if (name == "semicircle") return semicircle(p);
  if (name == "gaussian") return gaussian(p);
  if (name == "awk") return awk(p);
  if (name == "free_meixner") return free_meixner(p);
  if (name == "free_poisson") return free_poisson(p);
  if (name == "free_gamma") return free_gamma(p);
  if (name == "free_stable") return free_stable(p);
  if (name == "student_t3") return student_t3(p);
  if (name == "dirac") {
    MeasureSpec m = make_dirac(p.at("a"));
    return m;
  }
  return bernoulli(p);
}

}  // namespace freeprob
