// One PASS/FAIL line per acceptance criterion; exit status 1 if any line fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "freeprob/awk.hpp"
#include "freeprob/checkers.hpp"
#include "freeprob/cumulants.hpp"
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

struct Line {
  bool ok = true;
  std::ostringstream note;

  void need(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      note << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int n, const std::string& title, const std::function<void(Line&)>& body) {
  Line line;
  auto t0 = std::chrono::steady_clock::now();
  try {
    body(line);
  } catch (const std::exception& e) {
    line.ok = false;
    line.note << " [exception: " << e.what() << "]";
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!line.ok) ++failures;
  std::printf("%s criterion %d: %s;%s (%.1f s)\n", line.ok ? "PASS" : "FAIL", n, title.c_str(), line.note.str().c_str(),
              secs);
  std::fflush(stdout);
}

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

std::vector<Complex> lower_points(int radii, int angles, double r_lo, double r_hi) {
  std::vector<Complex> w;
  for (int i = 0; i < radii; ++i) {
    double r = r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (radii - 1));
    for (int j = 0; j < angles; ++j) w.push_back(std::polar(r, -kPi * (j + 0.5) / angles));
  }
  return w;
}

MeasureSpec meixner(Rational a, Rational b) { return catalog_lookup("free_meixner", {{"a", a}, {"b", b}}); }

}  // namespace

int main() {
  // Timings below are single-threaded.
  setenv("FREEPROB_THREADS", "1", 1);

  criterion(1, "Gaussian FSD on the default lower grid", [](Line& L) {
    auto t0 = std::chrono::steady_clock::now();
    auto r = fsd_grid_check(catalog_lookup("gaussian", {}));
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    L.note << " verdict " << to_string(r.verdict) << ", max Im C' = " << sci(r.margin) << " over " << r.evaluated
           << " points";
    L.need(r.verdict == Verdict::Pass, "verdict");
    L.need(r.grid && r.grid->per_decade == 25 && r.grid->angles == 64 && r.grid->r_min == 1e-2 && r.grid->r_max == 1e3,
           "default grid");
    L.need(r.evaluation_failures == 0 && r.evaluated == r.grid->count(), "full coverage");
    L.need(r.margin <= 1e-8, "margin <= 1e-8");
    L.need(secs < 60.0, "runtime < 60 s");
  });

  criterion(2, "AWK FSD for c in {-1, -0.75, -0.5, -0.25, 0}", [](Line& L) {
    double min_cov = 1.0;
    for (double c : {-1.0, -0.75, -0.5, -0.25, 0.0}) {
      auto r = awk_fsd_verify(c);
      double cov = r.details["below_axis"]["coverage"].get<double>();
      min_cov = std::min(min_cov, cov);
      L.need(r.verdict == Verdict::Pass, "verdict at c = " + sci(c));
      L.need(cov >= 0.9, "coverage at c = " + sci(c));
    }
    // The 50-point validation grid stays where the continued fraction converges.
    std::vector<Complex> grid;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 5; ++j) grid.emplace_back(-3.0 + 6.0 * i / 9.0, 0.5 + 0.75 * j);
    double worst_res = 0.0;
    for (double c : {-1.0, -0.99, -0.75, -0.5, -0.25, 0.0, 1.0, 2.0})
      for (Complex w : grid) worst_res = std::max(worst_res, riccati_residual(c, w));
    L.note << " min below-axis coverage " << sci(min_cov) << ", max Riccati residual " << sci(worst_res) << " on "
           << grid.size() << " upper points";
    L.need(worst_res < 1e-8, "Riccati residual < 1e-8");
  });

  criterion(3, "free Poisson(1,1) is FID but not FSD", [](Line& L) {
    auto m = catalog_lookup("free_poisson", {{"lambda", q(1)}, {"alpha", q(1)}});
    auto grid = fsd_grid_check(m);
    double wim = grid.details.contains("witness_cprime") ? grid.details["witness_cprime"]["im"].get<double>() : 0.0;
    L.need(grid.verdict == Verdict::Fail && grid.witness.has_value(), "grid FSD fails with witness");
    L.need(wim > 10.0, "Im C'(witness) > 10");
    if (grid.witness) L.note << " witness " << format_complex(*grid.witness) << " with Im C' = " << sci(wim);

    auto ms = m.moment_sequence(4);
    auto hk = fsd_cumulant_criterion(ms, 2, true);
    auto k = free_cumulants_from_moments(ms);
    RationalMatrix H{{2 * k.kappa(2), 3 * k.kappa(3)}, {3 * k.kappa(3), 4 * k.kappa(4)}};
    Rational det = determinant(H);
    L.need(hk.verdict == Verdict::Fail, "Hankel FSD fails at N = 2");
    L.need(det == -1, "Hankel determinant -1");
    L.need(hk.details["hankel"]["leading_minors"].back().get<std::string>() == "-1", "reported determinant -1");
    L.note << ", Hankel det " << to_string(det);

    L.need(fid_grid_check(m).verdict == Verdict::Pass, "grid FID passes");
    L.need(fid_cumulant_criterion(m.moment_sequence(12), 6, true).verdict == Verdict::Pass, "Hankel FID passes");
  });

  criterion(4, "free Meixner FSD iff 4b >= a^2 by monotone k", [](Line& L) {
    auto nu = [](Rational a, Rational b) { return meixner(a, b).triplet.value().nu; };
    auto p1 = fsd_monotonicity_check(nu(q(0), q(1)));
    auto p2 = fsd_monotonicity_check(nu(q(2), q(1)));
    auto f = fsd_monotonicity_check(nu(q(2), q(1, 2)));
    L.need(p1.verdict == Verdict::Pass, "(0,1) passes");
    L.need(p2.verdict == Verdict::Pass, "(2,1) passes");
    L.need(f.verdict == Verdict::Fail && f.witness.has_value(), "(2,1/2) fails with witness");
    L.note << " (0,1) " << to_string(p1.verdict) << ", (2,1) " << to_string(p2.verdict) << ", (2,1/2) "
           << to_string(f.verdict);
    if (f.witness) L.note << " at x = " << sci(f.witness->real());
  });

  criterion(5, "free cumulants equal the non-crossing oracle; exact roundtrips", [](Line& L) {
    std::vector<MeasureSpec> laws = {catalog_lookup("semicircle", {}), catalog_lookup("free_poisson", {}),
                                     catalog_lookup("gaussian", {}), meixner(q(1), q(1))};
    int compared = 0;
    for (const auto& m : laws) {
      auto ms = m.moment_sequence(10);
      auto k = free_cumulants_from_moments(ms);
      for (int n = 1; n <= 10; ++n, ++compared)
        L.need(k.kappa(n) == nc_partition_oracle(ms, n), m.name + " order " + std::to_string(n));
    }
    std::mt19937 rng(20240611);
    std::uniform_int_distribution<long> num(-40, 40), den(1, 12), ord(1, 12);
    int roundtrips = 0;
    for (int t = 0; t < 100; ++t) {
      int N = static_cast<int>(ord(rng));
      MomentSequence ms;
      ms.entries.push_back(Rational(1));
      FreeCumulantSequence ks;
      for (int n = 1; n <= N; ++n) {
        ms.entries.push_back(q(num(rng), den(rng)));
        ks.entries.push_back(q(num(rng), den(rng)));
      }
      L.need(moments_from_free_cumulants(free_cumulants_from_moments(ms)).entries == ms.entries, "m -> k -> m");
      L.need(free_cumulants_from_moments(moments_from_free_cumulants(ks)).entries == ks.entries, "k -> m -> k");
      ++roundtrips;
    }
    L.note << " " << compared << " oracle comparisons, " << roundtrips << " random sequences both ways";
  });

  criterion(6, "transform stack regressions", [](Line& L) {
    MeasureSpec sc = catalog_lookup("semicircle", {});
    sc.closed_form.reset();
    sc.density.reset();
    double worst = 0.0;
    bool newton = true;
    auto pts = lower_points(20, 10, 0.02, 0.9);
    for (Complex w : pts) {
      auto v = free_cumulant_transform_eval(sc, w);
      newton = newton && v.method == Method::NewtonInversion;
      worst = std::max(worst, std::abs(v.value - w * w));
    }
    L.need(pts.size() == 200 && newton, "200 points via Newton inversion");
    L.need(worst < 1e-10, "C(w) = w^2 to 1e-10");

    auto semi = catalog_lookup("semicircle", {});
    auto g = [&](Complex z) { return cauchy_eval(semi, z).value; };
    double sd = 0.0;
    for (int i = 0; i <= 20; ++i) {
      double x = -2.0 + 0.2 * i;
      double exact = std::sqrt(std::max(0.0, 4.0 - x * x)) / (2.0 * kPi);
      sd = std::max(sd, std::abs(stieltjes_inversion(g, x).value - exact));
    }
    L.need(sd < 1e-3, "semicircle density to 1e-3");

    auto gauss = catalog_lookup("gaussian", {});
    double g0 = stieltjes_inversion([&](Complex z) { return cauchy_eval(gauss, z).value; }, 0.0).value;
    double gd = std::abs(g0 - 1.0 / std::sqrt(2.0 * kPi));
    L.need(gd < 1e-4, "Gaussian density at 0 to 1e-4");
    L.note << " |C - w^2| <= " << sci(worst) << ", semicircle density error " << sci(sd) << ", Gaussian at 0 error "
           << sci(gd);
  });

  criterion(7, "Levy-Khintchine form equals the pair form; atom roundtrip", [](Line& L) {
    std::vector<std::pair<std::string, FreeCharacteristicTriplet>> ts = {
        {"semicircle", catalog_lookup("semicircle", {}).triplet.value()},
        {"free_poisson", catalog_lookup("free_poisson", {}).triplet.value()},
        {"free_gamma", catalog_lookup("free_gamma", {{"c", q(1)}, {"alpha", q(1)}}).triplet.value()},
    };
    double worst = 0.0;
    for (const auto& [name, t] : ts) {
      auto pair = pair_from_triplet(t);
      for (Complex w : lower_points(5, 6, 0.05, 5.0)) {
        Complex lhs = levy_khintchine_eval(t, w);
        Complex rhs = w * voiculescu_from_pair_eval(pair, 1.0 / w);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
      }
    }
    L.need(worst < 1e-8, "agreement to 1e-8");

    std::vector<Atom> atoms{{q(-3), q(1, 4)}, {q(1, 2), q(2)}, {q(1), q(1)}, {q(5, 2), q(1, 7)}};
    FreeCharacteristicTriplet t{q(3, 2), q(-1, 3), LevyMeasure::from_atoms(atoms)};
    auto back = triplet_from_pair(pair_from_triplet(t));
    bool exact = back.a == t.a && back.eta == t.eta && back.nu.atoms.size() == atoms.size();
    for (const auto& a : atoms)
      exact = exact && std::any_of(back.nu.atoms.begin(), back.nu.atoms.end(),
                                   [&](const Atom& b) { return b.x == a.x && b.mass == a.mass; });
    L.need(exact, "exact atom roundtrip");
    L.note << " max relative gap " << sci(worst) << ", atom roundtrip " << (exact ? "exact" : "inexact");
  });

  criterion(8, "Nevanlinna extraction and the Gaussian loop", [](Line& L) {
    auto e = nevanlinna_extract(catalog_lookup("semicircle", {}));
    L.need(std::abs(e.xi) <= 1e-9 && std::abs(e.total_mass - 2.0) <= 1e-9, "semicircle (0, 2)");
    L.note << " semicircle (xi, rho(R)) = (" << sci(e.xi) << ", " << e.total_mass << ")";

    auto g = catalog_lookup("gaussian", {});
    auto t = triplet_from_nevanlinna(nevanlinna_extract(g).pair());
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      Complex w = std::polar(0.1 + 0.04 * i, -kPi * (i + 0.5) / 20.0);
      worst = std::max(worst, std::abs(levy_khintchine_eval(t, w) - free_cumulant_transform_eval(g, w).value));
    }
    L.need(worst <= 1e-3, "Gaussian loop to 1e-3");
    L.note << ", Gaussian loop gap " << sci(worst);
  });

  criterion(9, "grid, Hankel and monotone-k routes agree on compact laws", [](Line& L) {
    std::vector<MeasureSpec> laws;
    for (const auto& name : catalog_names()) {
      auto m = catalog_lookup(name, {});
      if (m.compact_support && m.has_moment_source()) laws.push_back(m);
    }
    laws.push_back(meixner(q(2), q(1)));
    laws.push_back(meixner(q(2), q(1, 2)));
    laws.push_back(catalog_lookup("free_poisson", {{"lambda", q(3)}, {"alpha", q(1, 2)}}));
    laws.push_back(catalog_lookup("semicircle", {{"a", q(1)}, {"r", q(3)}}));
    int agree = 0;
    std::vector<std::string> two_route;
    for (const auto& m : laws) {
      Verdict grid = fsd_grid_check(m).verdict;
      Verdict hankel = fsd_cumulant_criterion(m.moment_sequence(12), 6, true).verdict;
      bool same = grid != Verdict::Inconclusive && grid == hankel;
      if (m.triplet) {
        same = same && fsd_monotonicity_check(m.triplet->nu).verdict == grid;
      } else {
        two_route.push_back(m.name);
      }
      L.need(same, m.name);
      agree += same;
    }
    L.note << " " << agree << "/" << laws.size() << " laws agree";
    for (const auto& n : two_route) L.note << "; " << n << " is not FID, so it has no triplet and only two routes apply";
  });

  criterion(10, "Kerov check for c in {-0.5, 0, 1, 2}", [](Line& L) {
    for (double c : {-0.5, 0.0, 1.0, 2.0}) {
      auto r = kerov_check(c);
      L.need(r.verdict == Verdict::Pass, "c = " + sci(c));
      L.note << " c=" << sci(c) << ": " << to_string(r.verdict) << " (max Im h " << sci(r.margin) << ")";
    }
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
