#include <doctest.h>

#include <cmath>

#include "freeprob/awk.hpp"
#include "freeprob/checkers.hpp"
#include "freeprob/cumulants.hpp"
#include "freeprob/levy.hpp"
#include "freeprob/measures.hpp"

using namespace freeprob;

namespace {

Rational q(long p, long d = 1) {
  Rational r(p, d);
  r.canonicalize();
  return r;
}

GridCheckOptions coarse() {
  GridCheckOptions o;
  o.grid.r_min = 1e-2;
  o.grid.r_max = 1e2;
  o.grid.per_decade = 6;
  o.grid.angles = 16;
  return o;
}

MeasureSpec meixner(long a_num, long a_den, long b_num, long b_den) {
  return catalog_lookup("free_meixner", {{"a", q(a_num, a_den)}, {"b", q(b_num, b_den)}, {"scale", q(1)}});
}

}  // namespace

TEST_CASE("fsd_grid_check: point mass sits on the boundary") {
  auto r = fsd_grid_check(catalog_lookup("dirac", {{"a", q(0)}}));
  CHECK(r.verdict == Verdict::Pass);
  CHECK(std::abs(r.margin) <= 1e-8);
  CHECK(r.evaluated == r.grid->count());
  CHECK(r.sampled);
  CHECK(r.check == "fsd_grid");
}

TEST_CASE("fsd_grid_check: semicircle and free Meixner with 4b >= a^2 pass") {
  CHECK(fsd_grid_check(catalog_lookup("semicircle", {})).verdict == Verdict::Pass);
  CHECK(fsd_grid_check(meixner(0, 1, 1, 1)).verdict == Verdict::Pass);
  CHECK(fsd_grid_check(meixner(2, 1, 1, 1)).verdict == Verdict::Pass);
}

TEST_CASE("fsd_grid_check: free Poisson(1,1) fails with a witness near 1.1 - 0.1i") {
  auto r = fsd_grid_check(catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}}));
  REQUIRE(r.verdict == Verdict::Fail);
  REQUIRE(r.witness.has_value());
  CHECK(r.witness->imag() < 0.0);
  CHECK(std::abs(*r.witness - Complex{1.0, 0.0}) < 0.2);
  CHECK(r.margin > 10.0);
  CHECK(r.details["witness_cprime"]["im"].get<double>() > 10.0);
  // A failure is confirmed once on a denser grid.
  CHECK(r.details["retried_at_density"].get<int>() == 4);

  // The closed-form witness itself: C'(w) = 1/(1-w)^2.
  auto v = free_cumulant_transform_derivative_eval(catalog_lookup("free_poisson", {}), Complex{1.1, -0.1});
  CHECK(v.value.imag() > 10.0);
}

TEST_CASE("fsd_grid_check: free Meixner with 4b < a^2 fails") {
  auto r = fsd_grid_check(meixner(2, 1, 1, 2));
  CHECK(r.verdict == Verdict::Fail);
  CHECK(r.witness.has_value());
}

TEST_CASE("fid_grid_check: free Poisson passes, Bernoulli fails on injectivity") {
  auto fp = fid_grid_check(catalog_lookup("free_poisson", {}));
  CHECK(fp.verdict == Verdict::Pass);
  CHECK(fp.check == "fid_grid");

  auto b = fid_grid_check(catalog_lookup("bernoulli", {}));
  REQUIRE(b.verdict == Verdict::Fail);
  REQUIRE(b.details.contains("injectivity_witness"));
  CHECK(b.details["injectivity_witness"]["relative_gap"].get<double>() > 1e-6);
  // A lower grid point whose C has a branch point nearby also fails FSD.
  CHECK(fsd_grid_check(catalog_lookup("bernoulli", {})).verdict == Verdict::Fail);
}

TEST_CASE("fid_grid_check: a failure on a bad slack is not retried when retry is off") {
  auto o = coarse();
  o.retry_dense = false;
  auto r = fsd_grid_check(catalog_lookup("free_poisson", {}), o);
  CHECK(r.verdict == Verdict::Fail);
  CHECK_FALSE(r.details.contains("retried_at_density"));
}

TEST_CASE("grid options are validated") {
  auto o = coarse();
  o.grid.r_min = -1.0;
  CHECK_THROWS_AS(fsd_grid_check(catalog_lookup("semicircle", {}), o), DomainError);
}

TEST_CASE("FSD implies FID across the catalog") {
  for (const auto& name : catalog_names()) {
    auto m = catalog_lookup(name, {});
    if (!m.supports_cauchy()) continue;
    CAPTURE(name);
    auto fsd = fsd_grid_check(m, coarse());
    auto fid = fid_grid_check(m, coarse());
    CHECK_FALSE((fsd.verdict == Verdict::Pass && fid.verdict == Verdict::Fail));
  }
}

TEST_CASE("grid and Hankel routes agree on compactly supported laws") {
  std::vector<MeasureSpec> laws = {
      catalog_lookup("semicircle", {{"a", q(1)}, {"r", q(3)}}),
      catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}}),
      catalog_lookup("free_poisson", {{"lambda", q(3)}, {"alpha", q(1, 2)}}),
      catalog_lookup("dirac", {{"a", q(2)}}),
      catalog_lookup("bernoulli", {}),
      meixner(0, 1, 1, 1),
      meixner(2, 1, 1, 1),
      meixner(2, 1, 1, 2),
      meixner(1, 1, 1, 5),
  };
  for (const auto& m : laws) {
    CAPTURE(m.name);
    CAPTURE(dump_json(to_json(m.params.begin()->second)));
    REQUIRE(m.compact_support.has_value());
    auto grid = fsd_grid_check(m);
    auto hankel = fsd_cumulant_criterion(m.moment_sequence(12), 6, true);
    CHECK(grid.verdict != Verdict::Inconclusive);
    CHECK(grid.verdict == hankel.verdict);
  }
}

TEST_CASE("nevanlinna_extract: semicircle and point mass are exact") {
  auto e = nevanlinna_extract(catalog_lookup("semicircle", {}));
  CHECK(std::abs(e.xi) < 1e-9);
  CHECK(std::abs(e.total_mass - 2.0) < 1e-9);

  NevanlinnaOptions few;
  few.points = 0;
  auto d = nevanlinna_extract(catalog_lookup("dirac", {{"a", q(3, 4)}}), few);
  CHECK(std::abs(d.xi - 0.75) < 1e-12);
  CHECK(std::abs(d.total_mass) < 1e-12);
}

TEST_CASE("nevanlinna_extract: total mass matches the sampled density") {
  auto m = meixner(0, 1, 1, 1);
  auto e = nevanlinna_extract(m);
  CHECK(std::abs(e.sampled_mass - e.total_mass) < 1e-3 * e.total_mass);
  auto j = to_json(e);
  CHECK(j["samples"].size() == e.x.size());
}

namespace {

double loop_gap(const MeasureSpec& m) {
  auto e = nevanlinna_extract(m);
  auto t = triplet_from_nevanlinna(e.pair());
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    Complex w = std::polar(0.1 + 0.04 * i, -kPi * (i + 0.5) / 20.0);
    worst = std::max(worst, std::abs(levy_khintchine_eval(t, w) - free_cumulant_transform_eval(m, w).value));
  }
  return worst;
}

}  // namespace

TEST_CASE("nevanlinna_extract: Gaussian extract -> triplet -> Levy-Khintchine loop closes") {
  CHECK(loop_gap(catalog_lookup("gaussian", {})) < 1e-3);
}

TEST_CASE("nevanlinna_extract: loop closes for the semicircle atom and free Meixner with 4b > a^2") {
  auto e = nevanlinna_extract(catalog_lookup("semicircle", {}));
  CHECK(std::abs(e.origin_atom - 2.0) < 1e-9);
  CHECK(loop_gap(catalog_lookup("semicircle", {})) < 1e-9);
  CHECK(loop_gap(meixner(1, 1, 1, 1)) < 1e-3);
}

TEST_CASE("nevanlinna_extract: rejects a bad window") {
  NevanlinnaOptions o;
  o.x_min = 1.0;
  o.x_max = -1.0;
  CHECK_THROWS_AS(nevanlinna_extract(catalog_lookup("semicircle", {}), o), DomainError);
}

TEST_CASE("ui_class_fsd_check: semicircle, point mass, AWK c = -1/2") {
  HalfPlaneGrid g{HalfPlane::Upper, 1e-2, 1e3, 10, 32, 1e-3};
  auto sc = catalog_lookup("semicircle", {});
  auto r = ui_class_fsd_check([&](Complex z) { return reciprocal_jet(sc, z); }, g.points(), 1e-8, 0.01, g);
  CHECK(r.verdict == Verdict::Pass);

  auto id = [](Complex z) { return ReciprocalJetValue{z, Complex{1.0, 0.0}, 0.0, Method::ClosedForm}; };
  auto d = ui_class_fsd_check(id, g.points());
  CHECK(d.verdict == Verdict::Pass);
  CHECK(d.margin == 0.0);

  auto awk = catalog_lookup("awk", {{"c", q(-1, 2)}});
  auto a = ui_class_fsd_check([&](Complex z) { return reciprocal_jet(awk, z); }, g.points(), 1e-8, 0.01, g);
  CHECK(a.verdict == Verdict::Pass);
}

TEST_CASE("ui_class_fsd_check: a positive value is a witnessed failure") {
  // F(z) = z - 1/z (Bernoulli) gives z - F/F' = 2z / (z^2 + 1), positive imaginary part near 0.5i.
  auto F = [](Complex z) { return ReciprocalJetValue{z - 1.0 / z, 1.0 + 1.0 / (z * z), 0.0, Method::ClosedForm}; };
  auto r = ui_class_fsd_check(F, {Complex{0.0, 0.5}, Complex{3.0, 3.0}});
  CHECK(r.verdict == Verdict::Fail);
  REQUIRE(r.witness.has_value());
  CHECK(std::abs(*r.witness - Complex{0.0, 0.5}) < 1e-15);
}

TEST_CASE("ui_class_fsd_check: evaluation failures make the verdict inconclusive") {
  auto F = [](Complex z) -> ReciprocalJetValue {
    if (z.real() > 0) throw ContinuationError("left the domain", z);
    return {z, 1.0, 0.0, Method::ClosedForm};
  };
  auto r = ui_class_fsd_check(F, {Complex{-1, 1}, Complex{1, 1}, Complex{2, 1}});
  CHECK(r.verdict == Verdict::Inconclusive);
  CHECK(r.evaluation_failures == 2);
}

TEST_CASE("kerov_check passes across the admissible range") {
  for (double c : {-0.5, 0.0, 1.0, 2.0}) {
    CAPTURE(c);
    auto r = kerov_check(c);
    CHECK(r.verdict == Verdict::Pass);
  }
  CHECK_THROWS_AS(kerov_check(-1.0), DomainError);
  CHECK_THROWS_AS(kerov_check(-1.5), DomainError);
}

TEST_CASE("kerov_check at c = 0: h(z) = z - F(z)") {
  auto g = catalog_lookup("gaussian", {});
  for (Complex z : {Complex{0.5, 1.0}, Complex{-2.0, 0.3}}) {
    auto J = reciprocal_jet(g, z);
    Complex h = J.dF / J.F;
    CHECK(std::abs(h - (z - J.F)) < 1e-9);
    CHECK(h.imag() < 0.0);
  }
}

TEST_CASE("check reports serialize with their witness") {
  auto r = fsd_grid_check(catalog_lookup("free_poisson", {}), coarse());
  auto j = to_json(r);
  CHECK(j["verdict"] == "fail");
  CHECK(j.contains("witness"));
  CHECK(j.contains("statement"));
  CHECK(dump_json(j) == dump_json(to_json(fsd_grid_check(catalog_lookup("free_poisson", {}), coarse()))));
}
