#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "freeprob/levy.hpp"
#include "freeprob/measures.hpp"
#include "freeprob/transforms.hpp"

using namespace freeprob;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

const Complex I{0.0, 1.0};

// G(z) by direct quadrature of a density over the real line, split at 0.
Complex quad_cauchy(const std::function<double(double)>& pdf, Complex z) {
  boost::math::quadrature::exp_sinh<double> es;
  auto re = [&](double t) { return (1.0 / (z - t)).real() * pdf(t); };
  auto im = [&](double t) { return (1.0 / (z - t)).imag() * pdf(t); };
  auto re_neg = [&](double t) { return re(-t); };
  auto im_neg = [&](double t) { return im(-t); };
  return {es.integrate(re, 0.0, std::numeric_limits<double>::infinity()) +
              es.integrate(re_neg, 0.0, std::numeric_limits<double>::infinity()),
          es.integrate(im, 0.0, std::numeric_limits<double>::infinity()) +
              es.integrate(im_neg, 0.0, std::numeric_limits<double>::infinity())};
}

double gauss_pdf(double t) { return std::exp(-0.5 * t * t) / std::sqrt(2.0 * kPi); }

// Semicircle(0, 2) seen only through its Jacobi data: no closed form, no density.
MeasureSpec semicircle_jacobi_only() {
  MeasureSpec m = catalog_lookup("semicircle", {});
  m.closed_form.reset();
  m.density.reset();
  m.name = "semicircle-jacobi";
  return m;
}

std::vector<Complex> lower_points(int radii, int angles, double r_lo, double r_hi) {
  std::vector<Complex> w;
  for (int i = 0; i < radii; ++i) {
    double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (radii - 1));
    for (int j = 0; j < angles; ++j) {
      double th = -kPi * (j + 0.5) / angles;
      w.push_back(std::polar(r, th));
    }
  }
  return w;
}

std::vector<std::string> g_capable() {
  std::vector<std::string> out;
  for (const auto& n : catalog_names())
    if (catalog_lookup(n, {}).supports_cauchy()) out.push_back(n);
  return out;
}

}  // namespace

TEST_CASE("continued fraction: terminating data is an exact rational function") {
  auto dirac = JacobiCoefficients::terminating({q(3, 2)}, {});
  Complex z{0.3, 0.7};
  auto v = continued_fraction_eval(dirac, z);
  CHECK(std::abs(v.G - 1.0 / (z - 1.5)) < 1e-15);
  CHECK(std::abs(v.dG + 1.0 / ((z - 1.5) * (z - 1.5))) < 1e-14);

  // Symmetric Bernoulli on {-1, 1}: G = z / (z^2 - 1).
  auto bern = JacobiCoefficients::terminating({q(0), q(0)}, {q(1)});
  auto b = continued_fraction_eval(bern, z);
  CHECK(std::abs(b.G - z / (z * z - 1.0)) < 1e-15);
  CHECK(std::abs(b.dG - (-(z * z + 1.0) / ((z * z - 1.0) * (z * z - 1.0)))) < 1e-14);
}

TEST_CASE("continued fraction: constant tail converges to the semicircle") {
  auto j = JacobiCoefficients::with_tail({}, {}, JacobiTail{q(0), q(1), q(0)});
  for (Complex z : {Complex{0, 2}, Complex{1.5, 0.3}, Complex{-0.2, 0.05}}) {
    auto v = continued_fraction_eval(j, z);
    Complex exact = (z - I * std::sqrt(4.0 - z * z)) / 2.0;
    if (exact.imag() > 0) exact = (z + I * std::sqrt(4.0 - z * z)) / 2.0;
    CHECK(std::abs(v.G - exact) < 1e-10);
  }
}

TEST_CASE("continued fraction: truncated data that runs out is reported") {
  auto j = JacobiCoefficients::truncated({q(0), q(0), q(0)}, {q(1), q(2)});
  TransformOptions o;
  o.cf_depth = 2;
  CHECK_THROWS_AS(continued_fraction_eval(j, Complex{0.0, 0.01}, o), ConvergenceError);
}

TEST_CASE("cauchy_eval: semicircle and point mass") {
  auto sc = catalog_lookup("semicircle", {{"a", q(0)}, {"r", q(2)}});
  auto v = cauchy_eval(sc, Complex{0, 2});
  CHECK(std::abs(v.value - Complex{0, 1 - std::sqrt(2.0)}) < 1e-14);
  CHECK(v.method == Method::ClosedForm);

  auto d = catalog_lookup("dirac", {{"a", q(-2, 3)}});
  Complex z{0.4, 1.1};
  CHECK(std::abs(cauchy_eval(d, z).value - 1.0 / (z + 2.0 / 3.0)) < 1e-15);
}

TEST_CASE("cauchy_eval: AWK c = 0 matches Gaussian quadrature") {
  auto awk = catalog_lookup("awk", {{"c", q(0)}});
  TransformOptions cf;
  cf.prefer = Method::ContinuedFraction;
  Complex z{0, 2};
  auto v = cauchy_eval(awk, z, cf);
  CHECK(v.method == Method::ContinuedFraction);
  CHECK(std::abs(v.value - quad_cauchy(gauss_pdf, z)) < 1e-8);

  for (Complex w : {Complex{1.0, 1.0}, Complex{-2.5, 0.7}, Complex{0.3, 5.0}})
    CHECK(std::abs(cauchy_eval(awk, w).value - quad_cauchy(gauss_pdf, w)) < 1e-8);
}

TEST_CASE("cauchy_eval: AWK c > 0 continued fraction matches its density") {
  for (double c : {0.5, 1.0}) {
    auto m = catalog_lookup("awk", {{"c", Rational(c)}});
    REQUIRE(m.density.has_value());
    TransformOptions cf;
    cf.prefer = Method::ContinuedFraction;
    Complex z{0.5, 1.5};
    auto a = cauchy_eval(m, z, cf);
    auto b = quad_cauchy(m.density->pdf, z);
    CHECK(std::abs(a.value - b) < 1e-7);
  }
}

TEST_CASE("cauchy_eval: Student t(3) against closed form and quadrature") {
  auto m = catalog_lookup("student_t3", {});
  const double s3 = std::sqrt(3.0);
  for (double y : {0.5, 2.0, 10.0}) {
    Complex expect = -I * (1.0 / (y + s3) + s3 / ((y + s3) * (y + s3)));
    CHECK(std::abs(cauchy_eval(m, Complex{0, y}).value - expect) < 1e-10);
  }
  auto pdf = [s3](double t) { return 6.0 * s3 / (kPi * (3.0 + t * t) * (3.0 + t * t)); };
  Complex z{1.0, 2.0};
  CHECK(std::abs(cauchy_eval(m, z).value - quad_cauchy(pdf, z)) < 1e-8);
}

TEST_CASE("cauchy_eval: density quadrature path for Marchenko-Pastur") {
  auto m = catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}});
  TransformOptions o;
  o.prefer = Method::Quadrature;
  Complex z{1.0, 0.5};
  auto v = cauchy_eval(m, z, o);
  CHECK(v.method == Method::Quadrature);
  // G(z) = (z - sqrt(z^2 - 4z)) / (2z) on the branch with Im G < 0.
  Complex s = std::sqrt(z * z - 4.0 * z);
  Complex g1 = (z - s) / (2.0 * z), g2 = (z + s) / (2.0 * z);
  Complex g = std::abs(z * g1 - 1.0) < std::abs(z * g2 - 1.0) && g1.imag() < 0 ? g1 : g2;
  CHECK(std::abs(v.value - g) < 1e-9);
}

TEST_CASE("cauchy_eval: argument and representation errors") {
  auto sc = catalog_lookup("semicircle", {});
  CHECK_THROWS_AS(cauchy_eval(sc, Complex{1.0, 0.0}), DomainError);
  CHECK_THROWS_AS(cauchy_eval(sc, Complex{1.0, -1.0}), DomainError);
  auto st = catalog_lookup("free_stable", {});
  CHECK_THROWS_AS(cauchy_eval(st, Complex{0.0, 1.0}), UnsupportedRepresentationError);
  TransformOptions bad;
  bad.quad_tol = 0.0;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("Herglotz signs on an upper grid for every G-capable catalog law") {
  HalfPlaneGrid g{HalfPlane::Upper, 1e-1, 1e2, 4, 8, 1e-2};
  for (const auto& name : g_capable()) {
    auto m = catalog_lookup(name, {});
    CAPTURE(name);
    for (Complex z : g.points()) {
      auto G = cauchy_eval(m, z);
      auto F = reciprocal_cauchy_eval(m, z);
      CHECK(G.value.imag() < 0.0);
      CHECK(F.value.imag() > 0.0);
      // Pick property of F for a probability measure.
      CHECK(F.value.imag() >= z.imag() * (1 - 1e-9));
    }
  }
}

TEST_CASE("reciprocal_cauchy_eval: closed forms") {
  auto d0 = catalog_lookup("dirac", {{"a", q(0)}});
  Complex z{0.7, 0.2};
  CHECK(std::abs(reciprocal_cauchy_eval(d0, z).value - z) < 1e-15);
  auto sc = catalog_lookup("semicircle", {});
  CHECK(std::abs(reciprocal_cauchy_eval(sc, Complex{0, 2}).value - Complex{0, 1 + std::sqrt(2.0)}) < 1e-14);
}

TEST_CASE("asymptotics: |iy G(iy) - 1| decays like 1/y") {
  for (const auto& name : g_capable()) {
    auto m = catalog_lookup(name, {});
    if (!m.finite_variance) continue;
    CAPTURE(name);
    double c0 = 0.0;
    for (double y : {10.0, 100.0, 1000.0, 10000.0}) {
      double d = normalization_defect(m, y);
      c0 = std::max(c0, d * y);
    }
    // Second moment bound: |zG - 1| <= (|m1| + m2 / y) / y for y >= 10.
    CHECK(c0 < 20.0);
  }
}

TEST_CASE("invert_reciprocal_cauchy: closed-form and self-consistency oracles") {
  auto sc = catalog_lookup("semicircle", {});
  CHECK(std::abs(invert_reciprocal_cauchy(sc, Complex{0, 2}) - Complex{0, 1.5}) < 1e-12);

  auto d0 = catalog_lookup("dirac", {{"a", q(0)}});
  CHECK(std::abs(invert_reciprocal_cauchy(d0, Complex{0.3, 0.4}) - Complex{0.3, 0.4}) < 1e-13);

  auto g = catalog_lookup("gaussian", {});
  Complex w{0, 3};
  Complex z = invert_reciprocal_cauchy(g, w);
  CHECK(std::abs(reciprocal_cauchy_eval(g, z).value - w) < 1e-10);
  CHECK(std::abs(cauchy_eval(g, z).value - 1.0 / w) < 1e-10);
}

TEST_CASE("inversion roundtrip F(F^{-1}(w)) = w") {
  TransformOptions o;
  for (const auto& name : {"gaussian", "free_meixner", "awk", "student_t3"}) {
    auto m = catalog_lookup(name, {});
    CAPTURE(name);
    for (Complex w : {Complex{0, 1}, Complex{1, 2}, Complex{-3, 0.5}, Complex{0.2, 20}}) {
      auto r = invert_reciprocal_cauchy_detailed(m, w, o);
      CHECK(std::abs(reciprocal_cauchy_eval(m, r.z).value - w) <= 10 * o.newton_tol * (1 + std::abs(w)));
    }
  }
}

TEST_CASE("invert_reciprocal_cauchy: outside the univalence image is an error, not a value") {
  // Semicircle: w + 1/w = -1.5i at w = 0.5i, so no preimage in C+ exists.
  auto sc = semicircle_jacobi_only();
  CHECK_THROWS_AS(invert_reciprocal_cauchy(sc, Complex{0, 0.5}), InversionError);
}

TEST_CASE("free cumulant transform: semicircle, free Poisson, point mass") {
  auto sc = catalog_lookup("semicircle", {{"a", q(1, 2)}, {"r", q(3)}});
  Complex w{0, -1};
  CHECK(std::abs(free_cumulant_transform_eval(sc, w).value - (0.5 * w + 2.25 * w * w)) < 1e-12);

  auto fp = catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}});
  Complex v{0, -0.5};
  CHECK(std::abs(free_cumulant_transform_eval(fp, v).value - v / (1.0 - v)) < 1e-10);
  CHECK(std::abs(v / (1.0 - v) - (-0.5 * I) * (1.0 - 0.5 * I) / 1.25) < 1e-15);

  auto d = catalog_lookup("dirac", {{"a", q(-3)}});
  CHECK(std::abs(free_cumulant_transform_eval(d, Complex{0.5, -0.25}).value - (-3.0) * Complex{0.5, -0.25}) < 1e-12);
  CHECK_THROWS_AS(free_cumulant_transform_eval(d, Complex{0.5, 0.25}), DomainError);
}

TEST_CASE("free cumulant transform vanishes at the origin") {
  for (const auto& name : {"semicircle", "gaussian", "free_poisson", "free_meixner"}) {
    CAPTURE(name);
    CHECK(cumulant_origin_defect(catalog_lookup(name, {})) < 1e-3);
  }
}

TEST_CASE("C' examples: semicircle, free Poisson witness, point mass") {
  auto sc = catalog_lookup("semicircle", {});
  CHECK(std::abs(free_cumulant_transform_derivative_eval(sc, Complex{0, -1}).value - Complex{0, -2}) < 1e-12);

  auto fp = catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}});
  Complex w{1.1, -0.1};
  Complex expect = 1.0 / ((1.0 - w) * (1.0 - w));
  CHECK(std::abs(expect - Complex{0, 50}) < 1e-9);
  auto v = free_cumulant_transform_derivative_eval(fp, w);
  CHECK(std::abs(v.value - expect) < 1e-7);
  CHECK(v.value.imag() > 10.0);

  auto d = catalog_lookup("dirac", {{"a", q(5, 4)}});
  CHECK(std::abs(free_cumulant_transform_derivative_eval(d, Complex{-0.3, -0.8}).value - 1.25) < 1e-12);
}

TEST_CASE("C' agrees with a contour derivative of C") {
  for (const auto& name : {"semicircle", "gaussian", "free_meixner", "free_poisson"}) {
    auto m = catalog_lookup(name, {});
    CAPTURE(name);
    for (Complex w : {Complex{0, -0.5}, Complex{0.3, -0.2}, Complex{-0.1, -1.5}}) CHECK(cprime_contour_discrepancy(m, w) < 1e-6);
  }
  TransformOptions o;
  o.cross_validate = true;
  auto g = catalog_lookup("gaussian", {});
  CHECK_NOTHROW(free_cumulant_transform_derivative_eval(g, Complex{0.2, -0.7}, o));
}

TEST_CASE("Voiculescu transform: semicircle, point mass, free Poisson pair") {
  auto sc = catalog_lookup("semicircle", {});
  CHECK(std::abs(voiculescu_eval(sc, Complex{0, 2}).value - Complex{0, -0.5}) < 1e-12);

  auto d = catalog_lookup("dirac", {{"a", q(7, 3)}});
  CHECK(std::abs(voiculescu_eval(d, Complex{-1, 3}).value - 7.0 / 3.0) < 1e-12);

  auto fp = catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}});
  Complex z{0, 2};
  Complex phi = voiculescu_eval(fp, z).value;
  CHECK(std::abs(phi - z / (z - 1.0)) < 1e-10);
  GeneratingPair p{q(1, 2), FiniteMeasure::from_atoms({{q(1), q(1, 2)}})};
  CHECK(std::abs(voiculescu_from_pair_eval(p, z) - z / (z - 1.0)) < 1e-14);
}

TEST_CASE("C(w) = w phi(1/w)") {
  for (const auto& name : {"semicircle", "gaussian", "free_poisson", "free_meixner", "awk"}) {
    auto m = catalog_lookup(name, {});
    CAPTURE(name);
    for (Complex w : lower_points(4, 5, 0.05, 0.8)) {
      Complex c = free_cumulant_transform_eval(m, w).value;
      Complex phi = voiculescu_eval(m, 1.0 / w).value;
      CHECK(std::abs(c - w * phi) < 1e-9);
    }
  }
}

TEST_CASE("semicircle C(w) = w^2 through Newton inversion of the continued fraction") {
  auto sc = semicircle_jacobi_only();
  auto pts = lower_points(20, 10, 0.02, 0.9);
  REQUIRE(pts.size() == 200);
  double worst = 0.0;
  for (Complex w : pts) {
    auto v = free_cumulant_transform_eval(sc, w);
    CHECK(v.method == Method::NewtonInversion);
    worst = std::max(worst, std::abs(v.value - w * w));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("Stieltjes inversion: semicircle and Gaussian densities") {
  auto sc = catalog_lookup("semicircle", {});
  auto g = [&](Complex z) { return cauchy_eval(sc, z).value; };
  CHECK(std::abs(stieltjes_inversion(g, 0.0).value - 1.0 / kPi) < 1e-5);
  CHECK(std::abs(stieltjes_inversion(g, 3.0).value) < 1e-10);
  for (double x : {-1.5, -0.5, 0.7, 1.9}) {
    double exact = std::sqrt(4.0 - x * x) / (2.0 * kPi);
    CHECK(std::abs(stieltjes_inversion(g, x).value - exact) < 1e-3);
  }

  // Continued fraction above the anchor, Riccati continuation of it below.
  auto gauss = catalog_lookup("gaussian", {});
  auto gg = [&](Complex z) { return cauchy_eval(gauss, z).value; };
  CHECK(std::abs(stieltjes_inversion(gg, 0.0).value - 1.0 / std::sqrt(2.0 * kPi)) < 1e-4);
}

TEST_CASE("Stieltjes inversion: bad options and a non-settling limit") {
  auto g = [](Complex z) { return 1.0 / z; };
  StieltjesOptions bad;
  bad.y0 = -1.0;
  CHECK_THROWS_AS(stieltjes_inversion(g, 0.0, bad), DomainError);
  // A point mass at x has no density there; the limit blows up like 1/y.
  CHECK_THROWS_AS(stieltjes_inversion(g, 0.0), InversionUnstableError);
}

TEST_CASE("to_string(Method) names") {
  CHECK(to_string(Method::ContinuedFraction) == "continued-fraction");
  CHECK(to_string(Method::NewtonInversion) == "newton-inversion");
}
