#include "freeprob/checkers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "freeprob/awk.hpp"
#include "freeprob/levy.hpp"
#include "freeprob/numerics.hpp"

namespace freeprob {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct PointValue {
  double q = kNaN;
  Complex value{};
  std::string error;
};

struct Reduction {
  double worst = -std::numeric_limits<double>::infinity();
  std::size_t index = std::numeric_limits<std::size_t>::max();
  std::size_t failures = 0;
  std::string first_error;
};

Reduction reduce(const std::vector<PointValue>& vals) {
  Reduction r;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (std::isnan(vals[i].q)) {
      if (r.failures++ == 0) r.first_error = vals[i].error;
      continue;
    }
    if (vals[i].q > r.worst) {
      r.worst = vals[i].q;
      r.index = i;
    }
  }
  return r;
}

// Runs F^{-1} along every angle of the grid. `target(z)` maps a grid point to the point
// whose preimage is needed; moduli of targets must decrease with `order`.
template <class Score>
std::vector<PointValue> sweep_rays(const MeasureSpec& m, const HalfPlaneGrid& g, bool ascending_radius,
                                   Complex (*target)(Complex), const TransformOptions& to, Score score) {
  auto pts = g.points();
  const std::size_t K = g.radius_count(), A = static_cast<std::size_t>(g.angles);
  std::vector<PointValue> vals(pts.size());
  numerics::parallel_for(A, [&](std::size_t j) {
    std::vector<std::size_t> idx;
    std::vector<Complex> targets;
    for (std::size_t s = 0; s < K; ++s) {
      std::size_t k = ascending_radius ? s : K - 1 - s;
      idx.push_back(k * A + j);
      targets.push_back(target(pts[k * A + j]));
    }
    std::vector<RayInversionPoint> res;
    try {
      res = invert_along_ray(m, targets, to);
    } catch (const Error& e) {
      for (auto i : idx) vals[i].error = e.what();
      return;
    }
    for (std::size_t s = 0; s < K; ++s) {
      PointValue& pv = vals[idx[s]];
      if (!res[s].ok) {
        pv.error = res[s].error;
        continue;
      }
      try {
        pv.value = score(pts[idx[s]], targets[s], res[s]);
        pv.q = pv.value.imag();
      } catch (const Error& e) {
        pv.error = e.what();
      }
    }
  });
  return vals;
}

Complex reciprocal(Complex w) { return 1.0 / w; }
Complex identity(Complex z) { return z; }

void fill_common(CheckReport& rep, const HalfPlaneGrid& g, const Reduction& r, double slack, std::size_t n) {
  rep.tolerance = slack;
  rep.grid = g;
  rep.evaluated = n;
  rep.evaluation_failures = r.failures;
  rep.margin = r.failures == n ? kNaN : r.worst;
  rep.sampled = true;
}

struct ProbeHit {
  Complex z;
  Complex Fz;
  Complex back;
  double defect;
};

struct ProbeOutcome {
  std::optional<ProbeHit> hit;
  std::size_t points = 0;
  std::size_t failures = 0;
};

// F^{-1}(F(z)) = z on a sub-grid of the C+ version of g. F univalent on C+ is necessary
// for free infinite divisibility, hence also for free selfdecomposability.
ProbeOutcome injectivity_probe(const MeasureSpec& m, HalfPlaneGrid g, const GridCheckOptions& opts) {
  ProbeOutcome out;
  if (!opts.injectivity_probe) return out;
  g.half = HalfPlane::Upper;
  auto pts = g.points();
  std::vector<std::size_t> sample;
  const std::size_t K = g.radius_count(), A = static_cast<std::size_t>(g.angles);
  for (std::size_t k = 0; k < K; k += static_cast<std::size_t>(std::max(1, opts.probe_radius_stride)))
    for (std::size_t j = 0; j < A; j += static_cast<std::size_t>(std::max(1, opts.probe_angle_stride)))
      sample.push_back(k * A + j);
  std::vector<std::optional<ProbeHit>> found(sample.size());
  std::vector<char> failed(sample.size(), 0);
  numerics::parallel_for(sample.size(), [&](std::size_t s) {
    Complex z = pts[sample[s]];
    try {
      Complex Fz = reciprocal_jet(m, z, opts.transform).F;
      Complex back = invert_reciprocal_cauchy(m, Fz, opts.transform);
      double defect = std::abs(back - z) / (1.0 + std::abs(z));
      if (defect > opts.probe_tol) found[s] = ProbeHit{z, Fz, back, defect};
    } catch (const Error&) {
      failed[s] = 1;
    }
  });
  out.points = sample.size();
  for (std::size_t s = 0; s < sample.size(); ++s) {
    out.failures += static_cast<std::size_t>(failed[s]);
    if (found[s] && (!out.hit || found[s]->defect > out.hit->defect)) out.hit = found[s];
  }
  return out;
}

Json probe_json(const ProbeOutcome& p, const GridCheckOptions& opts) {
  return {{"points", p.points}, {"failures", p.failures}, {"tolerance", opts.probe_tol}};
}

Json hit_json(const ProbeHit& h) {
  return {{"z", to_json(h.z)}, {"F(z)", to_json(h.Fz)}, {"F^{-1}(F(z))", to_json(h.back)}, {"relative_gap", h.defect}};
}

CheckReport fsd_once(const MeasureSpec& m, const HalfPlaneGrid& g, const GridCheckOptions& opts) {
  auto vals = sweep_rays(m, g, true, reciprocal, opts.transform,
                         [](Complex, Complex v, const RayInversionPoint& p) {
                           if (std::abs(p.jet.dF) < 1e-12)
                             throw DerivativeSingularityError("|F'(omega)| < 1e-12");
                           return p.result.z - v / p.jet.dF;
                         });
  auto pts = g.points();
  Reduction r = reduce(vals);
  ProbeOutcome probe = injectivity_probe(m, g, opts);
  CheckReport rep;
  rep.check = "fsd_grid";
  fill_common(rep, g, r, opts.slack, pts.size());
  bool excess = static_cast<double>(r.failures) > opts.max_failure_fraction * static_cast<double>(pts.size());
  if (r.index != std::numeric_limits<std::size_t>::max() && r.worst > opts.slack) {
    rep.verdict = Verdict::Fail;
    rep.witness = pts[r.index];
    rep.statement = "Im C'(w) > 0 at the witness: the measure is not freely selfdecomposable (up to numerical error)";
    rep.details["witness_cprime"] = to_json(vals[r.index].value);
  } else if (probe.hit) {
    rep.verdict = Verdict::Fail;
    rep.witness = 1.0 / probe.hit->Fz;
    rep.margin = probe.hit->defect;
    rep.tolerance = opts.probe_tol;
    rep.statement = "F is not injective on C+, so C has no analytic extension to C- (a branch point lies near the witness): the measure is not freely selfdecomposable";
    rep.details["injectivity_witness"] = hit_json(*probe.hit);
  } else if (excess || r.failures == pts.size()) {
    rep.verdict = Verdict::Inconclusive;
    rep.statement = "too many evaluation failures on the C- grid; no violation seen where C' was evaluated";
  } else {
    rep.verdict = Verdict::Pass;
    rep.statement = "Im C'(w) <= slack on every evaluated point of the C- grid (grid-consistent with free selfdecomposability, not a proof)";
  }
  rep.details["injectivity_probe"] = probe_json(probe, opts);
  if (r.failures > 0) rep.details["first_failure"] = r.first_error;
  return rep;
}

CheckReport fid_once(const MeasureSpec& m, const HalfPlaneGrid& g, const GridCheckOptions& opts) {
  auto vals = sweep_rays(m, g, false, identity, opts.transform,
                         [](Complex z, Complex, const RayInversionPoint& p) { return p.result.z - z; });
  auto pts = g.points();
  Reduction r = reduce(vals);

  ProbeOutcome probe = injectivity_probe(m, g, opts);
  const auto& hit = probe.hit;

  CheckReport rep;
  rep.check = "fid_grid";
  fill_common(rep, g, r, opts.slack, pts.size());
  bool excess = static_cast<double>(r.failures) > opts.max_failure_fraction * static_cast<double>(pts.size());
  bool sign_fail = r.index != std::numeric_limits<std::size_t>::max() && r.worst > opts.slack;
  if (sign_fail) {
    rep.verdict = Verdict::Fail;
    rep.witness = pts[r.index];
    rep.statement = "Im phi(z) > 0 at the witness: the measure is not freely infinitely divisible (up to numerical error)";
    rep.details["witness_phi"] = to_json(vals[r.index].value);
  } else if (hit) {
    rep.verdict = Verdict::Fail;
    rep.witness = hit->z;
    rep.margin = hit->defect;
    rep.tolerance = opts.probe_tol;
    rep.statement = "F is not injective on C+ (F^{-1}(F(z)) != z at the witness), so phi has no analytic extension to C+: the measure is not freely infinitely divisible";
    rep.details["injectivity_witness"] = hit_json(*hit);
  } else if (excess || r.failures == pts.size()) {
    rep.verdict = Verdict::Inconclusive;
    rep.statement = "too many evaluation failures on the C+ grid; no violation seen where phi was evaluated";
  } else {
    rep.verdict = Verdict::Pass;
    rep.statement = "Im phi(z) <= slack on every evaluated point of the C+ grid and F was injective on the probe set (grid-consistent with free infinite divisibility, not a proof)";
  }
  rep.details["max_im_phi"] = r.index == std::numeric_limits<std::size_t>::max() ? Json(nullptr) : Json(r.worst);
  rep.details["injectivity_probe"] = probe_json(probe, opts);
  if (r.failures > 0) rep.details["first_failure"] = r.first_error;
  return rep;
}

template <class Once>
CheckReport with_retry(const MeasureSpec& m, HalfPlaneGrid g, const GridCheckOptions& opts, Once once) {
  g.validate();
  CheckReport first = once(m, g, opts);
  first.details["measure"] = m.name;
  if (first.verdict != Verdict::Fail || !opts.retry_dense || opts.dense_factor <= 1) return first;
  HalfPlaneGrid dense = g.densified(opts.dense_factor);
  CheckReport second = once(m, dense, opts);
  second.details["measure"] = m.name;
  second.details["retried_at_density"] = opts.dense_factor;
  second.details["coarse_margin"] = first.margin;
  second.details["coarse_witness"] = first.witness ? to_json(*first.witness) : Json(nullptr);
  return second;
}

}  // namespace

CheckReport fid_grid_check(const MeasureSpec& m, const GridCheckOptions& opts) {
  HalfPlaneGrid g = opts.grid;
  g.half = HalfPlane::Upper;
  return with_retry(m, g, opts, fid_once);
}

CheckReport fsd_grid_check(const MeasureSpec& m, const GridCheckOptions& opts) {
  HalfPlaneGrid g = opts.grid;
  g.half = HalfPlane::Lower;
  return with_retry(m, g, opts, fsd_once);
}

// ---------------------------------------------------------------------------
// Nevanlinna pair
// ---------------------------------------------------------------------------

NevanlinnaPair NevanlinnaEstimate::pair() const {
  NevanlinnaPair p;
  p.xi = Rational(xi);
  if (origin_atom > 0.0) p.rho.atoms.push_back({Rational(0), Rational(origin_atom)});
  if (x.size() >= 2) {
    auto xs = x;
    std::vector<double> ys(density.size());
    for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = density_ok[i] ? std::max(0.0, density[i]) : kNaN;
    // Fill failed samples by linear interpolation between good neighbours.
    for (std::size_t i = 0; i < ys.size(); ++i) {
      if (!std::isnan(ys[i])) continue;
      std::size_t l = i, r = i;
      while (l > 0 && std::isnan(ys[l])) --l;
      while (r + 1 < ys.size() && std::isnan(ys[r])) ++r;
      double yl = std::isnan(ys[l]) ? 0.0 : ys[l];
      double yr = std::isnan(ys[r]) ? 0.0 : ys[r];
      double t = r == l ? 0.0 : (xs[i] - xs[l]) / (xs[r] - xs[l]);
      ys[i] = yl + t * (yr - yl);
    }
    const double L = std::max({tail_extent, std::abs(xs.front()), std::abs(xs.back())});
    p.rho.lo = -L;
    p.rho.hi = L;
    p.rho.breakpoints = {xs.front(), -1.0, 0.0, 1.0, xs.back()};
    p.rho.density = [xs, ys](double t) {
      if (t <= xs.front()) return ys.front() * (1.0 + xs.front() * xs.front()) / (1.0 + t * t);
      if (t >= xs.back()) return ys.back() * (1.0 + xs.back() * xs.back()) / (1.0 + t * t);
      auto it = std::upper_bound(xs.begin(), xs.end(), t);
      std::size_t i = static_cast<std::size_t>(it - xs.begin());
      double h = (t - xs[i - 1]) / (xs[i] - xs[i - 1]);
      return ys[i - 1] + h * (ys[i] - ys[i - 1]);
    };
  }
  return p;
}

NevanlinnaEstimate nevanlinna_extract(const MeasureSpec& m, const NevanlinnaOptions& opts) {
  if (opts.points < 0 || opts.origin_decades < 0 || opts.origin_per_decade < 1 ||
      (opts.points >= 2 && !(opts.x_max > opts.x_min)))
    throw DomainError("invalid Nevanlinna sampling grid");
  NevanlinnaEstimate e;
  Complex at = free_cumulant_transform_derivative_eval(m, Complex(0.0, -1.0), opts.transform).value;
  e.xi = at.real();
  e.total_mass = -at.imag();
  const std::size_t base = static_cast<std::size_t>(std::max(opts.points, 0));
  std::vector<double> xs(base);
  const double th0 = std::atan(opts.x_min), th1 = std::atan(opts.x_max);
  for (std::size_t i = 0; i < base; ++i)
    xs[i] = base == 1 ? opts.x_min : std::tan(th0 + (th1 - th0) * static_cast<double>(i) / (base - 1));
  if (base >= 2) {
    for (int k = 1; k <= opts.origin_decades * opts.origin_per_decade; ++k) {
      double r = std::pow(10.0, -static_cast<double>(k) / opts.origin_per_decade);
      for (double x : {-r, r})
        if (x > opts.x_min && x < opts.x_max) xs.push_back(x);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  }
  struct Sample {
    double x;
    double density = 0.0;
    double error = kNaN;
    bool ok = false;
  };
  auto sample = [&](std::vector<Sample>& batch) {
    numerics::parallel_for(batch.size(), [&](std::size_t i) {
      const double x = batch[i].x;
      auto g = [&](Complex z) {
        return free_cumulant_transform_derivative_eval(m, 1.0 / z, opts.transform).value / (1.0 + x * x);
      };
      try {
        StieltjesOptions so = opts.stieltjes;
        so.y0 *= x == 0.0 ? 1.0 : std::abs(x);
        auto s = stieltjes_inversion(g, x, so);
        batch[i].density = s.value;
        batch[i].error = s.est_error;
        batch[i].ok = true;
      } catch (const Error&) {
      }
    });
  };
  std::vector<Sample> samples;
  for (double x : xs) samples.push_back({x});
  sample(samples);

  // Split cells whose trapezoid share is still unsettled: edges of the support and
  // integrable spikes need far finer spacing than the bulk.
  const double cell_tol = opts.refine_tol * std::max(e.total_mass, 1e-300);
  std::size_t budget = static_cast<std::size_t>(std::max(opts.refine_points, 0));
  for (int round = 0; round < opts.refine_rounds && budget > 0; ++round) {
    const std::size_t N = samples.size();
    // Slope of each cell; a failed endpoint borrows its partner's value.
    std::vector<double> slope(N, 0.0);
    std::vector<bool> blind(N, false);
    for (std::size_t i = 1; i < N; ++i) {
      const Sample& l = samples[i - 1];
      const Sample& r = samples[i];
      blind[i] = !l.ok || !r.ok;
      if (!blind[i]) slope[i] = (r.density - l.density) / (r.x - l.x);
    }
    std::vector<Sample> mids;
    for (std::size_t i = 1; i < N && mids.size() < budget; ++i) {
      const Sample& l = samples[i - 1];
      const Sample& r = samples[i];
      const double h = r.x - l.x;
      if (h <= 1e-12 * (1.0 + std::abs(l.x))) continue;
      double err;
      if (blind[i]) {
        if (!l.ok && !r.ok) continue;
        err = h * std::abs(l.ok ? l.density : r.density);
      } else {
        // Linear-interpolation error of the cell from the slope change at its ends.
        double bend = 0.0;
        if (i >= 2 && !blind[i - 1]) bend = std::max(bend, std::abs(slope[i] - slope[i - 1]));
        if (i + 1 < N && !blind[i + 1]) bend = std::max(bend, std::abs(slope[i + 1] - slope[i]));
        err = bend * h * h / 8.0;
      }
      if (err > cell_tol) mids.push_back({0.5 * (l.x + r.x)});
    }
    if (mids.empty()) break;
    budget -= mids.size();
    sample(mids);
    samples.insert(samples.end(), mids.begin(), mids.end());
    std::sort(samples.begin(), samples.end(), [](const Sample& u, const Sample& v) { return u.x < v.x; });
  }

  const std::size_t n = samples.size();
  e.tail_extent = opts.tail_extent;
  for (const Sample& s : samples) {
    e.x.push_back(s.x);
    e.density.push_back(s.ok ? s.density : 0.0);
    e.density_error.push_back(s.error);
    e.density_ok.push_back(s.ok);
    if (!s.ok) ++e.failures;
  }
  for (std::size_t i = 1; i < n; ++i)
    if (e.density_ok[i] && e.density_ok[i - 1])
      e.sampled_mass += 0.5 * (e.x[i] - e.x[i - 1]) * (e.density[i] + e.density[i - 1]);
  // x = 0 is never sampled, so an atom there only shows up as missing mass.
  double defect = e.total_mass - e.sampled_mass;
  if (n >= 2 && defect > opts.origin_atom_threshold * e.total_mass) e.origin_atom = defect;
  return e;
}

Json to_json(const NevanlinnaEstimate& e) {
  Json samples = Json::array();
  for (std::size_t i = 0; i < e.x.size(); ++i)
    samples.push_back({{"x", e.x[i]},
                       {"density", e.density_ok[i] ? Json(e.density[i]) : Json(nullptr)},
                       {"est_error", e.density_ok[i] ? Json(e.density_error[i]) : Json(nullptr)}});
  return {{"xi", e.xi},
          {"rho_total_mass", e.total_mass},
          {"sampled_mass", e.sampled_mass},
          {"origin_atom", e.origin_atom},
          {"failures", e.failures},
          {"samples", samples}};
}

// ---------------------------------------------------------------------------
// Sign check of omega - F/F' on a UI-class domain, and Kerov's measure
// ---------------------------------------------------------------------------

CheckReport ui_class_fsd_check(const ReciprocalJetEvaluator& F, const std::vector<Complex>& points, double slack,
                               double max_failure_fraction, std::optional<HalfPlaneGrid> grid) {
  std::vector<PointValue> vals(points.size());
  numerics::parallel_for(points.size(), [&](std::size_t i) {
    try {
      auto J = F(points[i]);
      if (std::abs(J.dF) < 1e-12) throw DerivativeSingularityError("|F'| < 1e-12");
      vals[i].value = points[i] - J.F / J.dF;
      vals[i].q = vals[i].value.imag();
    } catch (const Error& e) {
      vals[i].error = e.what();
    }
  });
  Reduction r = reduce(vals);
  CheckReport rep;
  rep.check = "ui_class_fsd";
  rep.tolerance = slack;
  rep.grid = grid;
  rep.evaluated = points.size();
  rep.evaluation_failures = r.failures;
  rep.margin = r.index == std::numeric_limits<std::size_t>::max() ? kNaN : r.worst;
  rep.sampled = true;
  bool excess = static_cast<double>(r.failures) > max_failure_fraction * static_cast<double>(points.size());
  if (r.index != std::numeric_limits<std::size_t>::max() && r.worst > slack) {
    rep.verdict = Verdict::Fail;
    rep.witness = points[r.index];
    rep.statement = "Im(omega - F(omega)/F'(omega)) > 0 at the witness";
  } else if (excess || points.empty() || r.failures == points.size()) {
    rep.verdict = Verdict::Inconclusive;
    rep.statement = "too many evaluation failures on the supplied domain sample";
  } else {
    rep.verdict = Verdict::Pass;
    rep.statement = "Im(omega - F(omega)/F'(omega)) <= slack on every evaluated point (grid-consistent, not a proof)";
  }
  if (r.failures > 0) rep.details["first_failure"] = r.first_error;
  return rep;
}

CheckReport kerov_check(double c, const KerovOptions& opts) {
  if (!(c > -1.0)) throw DomainError("Kerov's measure needs c > -1");
  HalfPlaneGrid g = opts.grid;
  g.half = HalfPlane::Upper;
  g.validate();
  MeasureSpec m = awk_measure(c);
  auto pts = g.points();
  std::vector<PointValue> vals(pts.size());
  numerics::parallel_for(pts.size(), [&](std::size_t i) {
    try {
      auto J = reciprocal_jet(m, pts[i], opts.transform);
      vals[i].value = J.dF / J.F;
      vals[i].q = vals[i].value.imag();
    } catch (const Error& e) {
      vals[i].error = e.what();
    }
  });
  Reduction r = reduce(vals);

  Json asym = Json::array();
  bool decreasing = true, asym_ok = true;
  double prev = std::numeric_limits<double>::infinity(), last = kNaN;
  for (double y : opts.asymptotic_y) {
    Complex z(0.0, y);
    double d;
    try {
      auto J = reciprocal_jet(m, z, opts.transform);
      d = std::abs(z * (J.dF / J.F) - 1.0);
    } catch (const Error&) {
      asym_ok = false;
      asym.push_back({{"y", y}, {"defect", nullptr}});
      continue;
    }
    if (!(d <= prev)) decreasing = false;
    prev = d;
    last = d;
    asym.push_back({{"y", y}, {"defect", d}});
  }
  bool asym_pass = asym_ok && decreasing && last <= opts.asymptotic_tol;

  CheckReport rep;
  rep.check = "kerov";
  fill_common(rep, g, r, opts.slack, pts.size());
  bool excess = static_cast<double>(r.failures) > opts.max_failure_fraction * static_cast<double>(pts.size());
  bool sign_fail = r.index != std::numeric_limits<std::size_t>::max() && r.worst > opts.slack;
  if (sign_fail) {
    rep.verdict = Verdict::Fail;
    rep.witness = pts[r.index];
    rep.statement = "Im h(z) >= 0 at the witness: h = -G'/G is not the Cauchy transform of a probability measure";
  } else if (asym_ok && !asym_pass) {
    rep.verdict = Verdict::Fail;
    rep.witness = Complex(0.0, opts.asymptotic_y.empty() ? 0.0 : opts.asymptotic_y.back());
    rep.statement = "|iy h(iy) - 1| does not decay to the tolerance along the imaginary axis";
  } else if (excess || !asym_ok || r.failures == pts.size()) {
    rep.verdict = Verdict::Inconclusive;
    rep.statement = "too many continued-fraction evaluation failures";
  } else {
    rep.verdict = Verdict::Pass;
    rep.statement = "Im h < 0 on the grid and iy h(iy) -> 1 (grid-consistent with h being a Cauchy transform)";
  }
  rep.details["c"] = c;
  rep.details["asymptotics"] = asym;
  rep.details["asymptotic_tolerance"] = opts.asymptotic_tol;
  if (r.failures > 0) rep.details["first_failure"] = r.first_error;
  return rep;
}

}  // namespace freeprob
