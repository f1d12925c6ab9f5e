#include <doctest.h>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <random>

#include "freeprob/cumulants.hpp"
#include "freeprob/levy.hpp"
#include "freeprob/measure_io.hpp"
#include "freeprob/measures.hpp"

using namespace freeprob;

namespace {

// Moments as weighted Motzkin paths: flat steps at height h weigh alpha_h, a down step
// from height h weighs beta_h. Brute force over all 3^n step words.
Rational motzkin_moment(const std::function<Rational(int)>& alpha, const std::function<Rational(int)>& beta, int n) {
  Rational total = 0;
  long words = 1;
  for (int i = 0; i < n; ++i) words *= 3;
  for (long w = 0; w < words; ++w) {
    long code = w;
    int h = 0;
    Rational weight = 1;
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      int step = static_cast<int>(code % 3);
      code /= 3;
      if (step == 0) {
        ++h;
      } else if (step == 1) {
        weight *= alpha(h);
      } else {
        if (h == 0) ok = false;
        else weight *= beta(h--);
      }
      if (h > n - i - 1) ok = false;
    }
    if (ok && h == 0) total += weight;
  }
  return total;
}

Rational binom(int n, int k) {
  mpz_class r;
  mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned>(n), static_cast<unsigned>(k));
  return Rational(r);
}

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

double tanh_sinh_moment(const DensitySpec& d, int n) {
  boost::math::quadrature::tanh_sinh<double> ts;
  auto f = [&](double t) { return std::pow(t, n) * d.pdf(t); };
  double total = 0.0;
  std::vector<double> cuts = d.breakpoints;
  cuts.push_back(d.lo);
  cuts.push_back(d.hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    if (cuts[i] >= d.lo && cuts[i + 1] <= d.hi) total += ts.integrate(f, cuts[i], cuts[i + 1]);
  for (const auto& [x, m] : d.atoms) total += m * std::pow(x, n);
  return total;
}

}  // namespace

TEST_SUITE("jacobi moments") {
  TEST_CASE("semicircle gives Catalan numbers") {
    auto j = JacobiCoefficients::with_tail({}, {}, {q(0), q(1), q(0)});
    auto m = moments_from_jacobi(j, 12);
    for (int n = 0; n <= 12; ++n) {
      Rational expect = n % 2 ? Rational(0) : binom(n, n / 2) / (n / 2 + 1);
      CHECK(m[n] == expect);
    }
  }

  TEST_CASE("gaussian gives double factorials") {
    auto m = catalog_lookup("gaussian", {}).moment_sequence(14);
    Rational df = 1;
    for (int n = 0; n <= 14; n += 2) {
      if (n >= 2) df *= n - 1;
      CHECK(m[n] == df);
      if (n + 1 <= 14) CHECK(m[n + 1] == 0);
    }
  }

  TEST_CASE("AWK second and fourth moments") {
    for (Rational c : {q(-3, 4), q(0), q(1, 3), q(2)}) {
      auto m = catalog_lookup("awk", {{"c", c}}).moment_sequence(4);
      CHECK(m[2] == c + 1);
      CHECK(m[4] == (c + 1) * (c + 1) + (c + 1) * (c + 2));
    }
  }

  TEST_CASE("zero order is the normalization") {
    auto m = moments_from_jacobi(JacobiCoefficients::truncated({q(3)}, {}), 0);
    REQUIRE(m.entries.size() == 1);
    CHECK(m[0] == 1);
  }

  TEST_CASE("agrees with a Motzkin path enumeration") {
    std::vector<Rational> a{q(1, 2), q(-1), q(2, 3), q(0), q(5), q(-1, 7), q(1), q(3)};
    std::vector<Rational> b{q(1), q(1, 2), q(3), q(2, 5), q(1), q(7), q(1, 9)};
    auto j = JacobiCoefficients::truncated(a, b);
    auto m = moments_from_jacobi(j, 10);
    for (int n = 0; n <= 10; ++n)
      CHECK(m[n] == motzkin_moment([&](int h) { return a.at(h); }, [&](int h) { return b.at(h - 1); }, n));
  }

  TEST_CASE("asking past the stored coefficients throws") {
    auto j = JacobiCoefficients::truncated({q(0), q(0)}, {q(1)});
    CHECK_THROWS_AS(moments_from_jacobi(j, 9), TruncationError);
  }

  TEST_CASE("terminating data is a finite atomic law") {
    // alpha = (0, 0), beta_1 = 1: atoms at +-1 with mass 1/2.
    auto j = JacobiCoefficients::terminating({q(0), q(0)}, {q(1)});
    auto m = moments_from_jacobi(j, 8);
    for (int n = 0; n <= 8; ++n) CHECK(m[n] == (n % 2 ? 0 : 1));
  }
}

TEST_SUITE("jacobi from moments") {
  TEST_CASE("gaussian to order six") {
    MomentSequence m{{q(1), q(0), q(1), q(0), q(3), q(0), q(15)}};
    auto j = jacobi_from_moments(m);
    REQUIRE(j.alpha_head().size() == 3);
    REQUIRE(j.beta_head().size() == 3);
    for (int k = 0; k < 3; ++k) {
      CHECK(j.alpha(k) == 0);
      CHECK(j.beta(k + 1) == k + 1);
    }
  }

  TEST_CASE("semicircle to order four") {
    MomentSequence m{{q(1), q(0), q(1), q(0), q(2)}};
    auto j = jacobi_from_moments(m);
    REQUIRE(j.alpha_head().size() == 2);
    REQUIRE(j.beta_head().size() == 2);
    CHECK(j.alpha(0) == 0);
    CHECK(j.alpha(1) == 0);
    CHECK(j.beta(1) == 1);
    CHECK(j.beta(2) == 1);
  }

  TEST_CASE("order one returns the mean") {
    auto j = jacobi_from_moments(MomentSequence{{q(1), q(7, 3)}});
    REQUIRE(j.alpha_head().size() == 1);
    CHECK(j.alpha(0) == q(7, 3));
  }

  TEST_CASE("indefinite Hankel data is rejected") {
    CHECK_THROWS_AS(jacobi_from_moments(MomentSequence{{q(1), q(0), q(-1)}}), NotAMomentSequenceError);
    CHECK_THROWS_AS(jacobi_from_moments(MomentSequence{{q(1), q(2), q(3)}}), NotAMomentSequenceError);
    CHECK_FALSE(is_valid_moment_sequence(MomentSequence{{q(1), q(0), q(1), q(0), q(1, 2)}}));
    CHECK(is_valid_moment_sequence(MomentSequence{{q(1), q(0), q(1), q(0), q(1)}}));
  }

  TEST_CASE("exact roundtrip on random Jacobi data") {
    std::mt19937 rng(20240611);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 6), pos(1, 12);
    for (int trial = 0; trial < 40; ++trial) {
      int n = 1 + trial % 6;
      std::vector<Rational> a, b;
      for (int k = 0; k < n; ++k) a.push_back(q(num(rng), den(rng)));
      for (int k = 0; k < n; ++k) b.push_back(q(pos(rng), den(rng)));
      auto m = moments_from_jacobi(JacobiCoefficients::truncated(a, b), 2 * static_cast<std::size_t>(n));
      REQUIRE(is_valid_moment_sequence(m));
      auto j = jacobi_from_moments(m);
      CHECK(moments_from_jacobi(j, m.order()).entries == m.entries);
      for (int k = 0; k < n; ++k) {
        CHECK(j.alpha(k) == a[k]);
        CHECK(j.beta(k + 1) == b[k]);
      }
    }
  }
}

TEST_SUITE("catalog") {
  TEST_CASE("AWK at c = 0 and the standard gaussian share all moments") {
    auto a = catalog_lookup("awk", {{"c", q(0)}}).moment_sequence(24);
    auto g = catalog_lookup("gaussian", {}).moment_sequence(24);
    CHECK(a.entries == g.entries);
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(catalog_lookup("semicircle", {{"radius", q(2)}}), DomainError);
    CHECK_THROWS_AS(catalog_lookup("free_meixner", {{"b", q(-2)}}), DomainError);
    CHECK_THROWS_AS(catalog_lookup("awk", {{"c", q(-3, 2)}}), DomainError);
    CHECK_THROWS_AS(catalog_lookup("free_stable", {{"alpha", q(2)}}), DomainError);
    CHECK_THROWS_AS(catalog_lookup("cauchy_lorentz", {}), UnknownMeasureError);
  }

  TEST_CASE("heavy-tailed entries carry no moments") {
    for (const char* name : {"free_stable", "free_gamma", "student_t3"}) {
      auto m = catalog_lookup(name, {});
      CHECK_FALSE(m.has_moment_source());
      CHECK_THROWS(m.moment_sequence(2));
    }
  }

  TEST_CASE("density representations reproduce the rational moments") {
    std::vector<std::pair<std::string, ParamRecord>> entries = {
        {"semicircle", {}},
        {"semicircle", {{"a", q(1, 2)}, {"r", q(3)}}},
        {"gaussian", {{"mean", q(1)}, {"variance", q(2)}}},
        {"free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}}},
        {"free_poisson", {{"lambda", q(1, 2)}, {"alpha", q(2)}}},
        {"free_poisson", {{"lambda", q(3)}, {"alpha", q(-1)}}},
        {"awk", {{"c", q(1)}}},
        {"awk", {{"c", q(5, 2)}}},
    };
    for (const auto& [name, params] : entries) {
      CAPTURE(name);
      auto m = catalog_lookup(name, params);
      REQUIRE(m.density.has_value());
      auto exact = m.moment_sequence(8);
      auto quad = moments_from_density(*m.density, 8);
      for (int n = 0; n <= 8; ++n) {
        CAPTURE(n);
        double e = to_double(exact[n]);
        CHECK(std::abs(quad[n] - e) <= 1e-9 * std::max(1.0, std::abs(e)));
      }
    }
  }

  TEST_CASE("library density moments agree with tanh-sinh quadrature") {
    auto m = catalog_lookup("free_poisson", {{"lambda", q(1, 3)}, {"alpha", q(1)}});
    auto lib = moments_from_density(*m.density, 6);
    for (int n = 0; n <= 6; ++n) CHECK(std::abs(lib[n] - tanh_sinh_moment(*m.density, n)) < 1e-9);
  }

  TEST_CASE("triplet representations reproduce the free cumulants") {
    std::vector<std::pair<std::string, ParamRecord>> entries = {
        {"semicircle", {{"a", q(1)}, {"r", q(2)}}},
        {"free_poisson", {{"lambda", q(2)}, {"alpha", q(1, 2)}}},
        {"free_poisson", {{"lambda", q(1)}, {"alpha", q(3)}}},
        {"free_meixner", {{"a", q(1)}, {"b", q(1)}}},
        {"free_meixner", {{"a", q(2)}, {"b", q(0)}}},
        {"dirac", {{"a", q(-2)}}},
    };
    for (const auto& [name, params] : entries) {
      CAPTURE(name);
      auto m = catalog_lookup(name, params);
      REQUIRE(m.triplet.has_value());
      auto k = free_cumulants_from_moments(m.moment_sequence(8));
      auto kt = free_cumulants_from_triplet(*m.triplet, 8);
      for (std::size_t n = 1; n <= 8; ++n) {
        CAPTURE(n);
        double e = to_double(k.kappa(n));
        CHECK(std::abs(kt[n - 1] - e) <= 1e-9 * std::max(1.0, std::abs(e)));
      }
    }
  }

  TEST_CASE("compact support encloses the support") {
    auto s = catalog_lookup("semicircle", {{"a", q(1)}, {"r", q(3)}}).compact_support;
    REQUIRE(s);
    CHECK(s->first == doctest::Approx(-2.0));
    CHECK(s->second == doctest::Approx(4.0));
    auto b = catalog_lookup("bernoulli", {}).compact_support;
    REQUIRE(b);
    CHECK(b->first == -1.0);
    CHECK(b->second == 1.0);
    auto p = catalog_lookup("free_poisson", {{"lambda", q(4)}, {"alpha", q(1)}}).compact_support;
    REQUIRE(p);
    CHECK(p->first <= 1.0);
    CHECK(p->second >= 9.0);
    CHECK_FALSE(catalog_lookup("gaussian", {}).compact_support);
  }

  TEST_CASE("every catalog name resolves with defaults") {
    for (const auto& name : catalog_names()) {
      CAPTURE(name);
      auto m = catalog_lookup(name, {});
      CHECK(m.name == name);
      CHECK_FALSE(m.representation_tags().empty());
    }
  }
}

TEST_SUITE("measure io") {
  TEST_CASE("key=value records") {
    auto p = parse_param_record("# free Meixner\na = 2\n\nb=1/2   # boundary case\nscale = 1.5\n");
    CHECK(p.size() == 3);
    CHECK(p.at("a") == 2);
    CHECK(p.at("b") == q(1, 2));
    CHECK(p.at("scale") == q(3, 2));
    CHECK_THROWS_AS(parse_param_record("a 2"), DomainError);
    CHECK_THROWS_AS(parse_param_record("a=1\na=2"), DomainError);
    CHECK_THROWS_AS(parse_param_record("a=x"), DomainError);
  }

  TEST_CASE("catalog measures survive a JSON roundtrip") {
    auto m = catalog_lookup("free_meixner", {{"a", q(1, 3)}, {"b", q(2)}});
    Json doc = measure_to_json(m);
    CHECK(doc["name"] == "free_meixner");
    CHECK(doc["jacobi"]["extent"] == "tail");
    auto back = measure_from_json(Json::parse(doc.dump()));
    CHECK(back.params == m.params);
    CHECK(back.moment_sequence(10).entries == m.moment_sequence(10).entries);
  }

  TEST_CASE("raw jacobi and moment documents") {
    Json jd = Json::parse(R"({"jacobi": {"alpha": ["0", "0"], "beta": ["1"], "extent": "terminating"}})");
    auto m = measure_from_json(jd);
    REQUIRE(m.closed_form);
    REQUIRE(m.compact_support);
    CHECK(m.moment_sequence(4).entries == std::vector<Rational>{q(1), q(0), q(1), q(0), q(1)});

    Json td = Json::parse(R"({"jacobi": {"alpha": [], "beta": [], "tail": {"alpha": 0, "beta_const": "1"}}})");
    auto sc = measure_from_json(td);
    CHECK(sc.moment_sequence(6).entries[6] == 5);

    auto mm = measure_from_json(Json::parse(R"({"moments": ["1", "0", "1"]})"));
    CHECK(mm.has_moment_source());
    CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"moments": ["1", "0", "-1"]})")), DomainError);
    CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"catalog": "semicircle", "params": {"q": 1}})")),
                    DomainError);
    CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"foo": 1})")), DomainError);
  }
}
