#include "freeprob/riccati.hpp"

#include <algorithm>
#include <cmath>

namespace freeprob {

namespace {

inline Complex rhs(int chart, double c, Complex w, Complex y) {
  return chart == 0 ? w * y - y * y - c : 1.0 - w * y + c * y * y;
}

Complex rk4(int chart, double c, Complex w0, Complex dw, Complex y) {
  Complex k1 = rhs(chart, c, w0, y);
  Complex k2 = rhs(chart, c, w0 + 0.5 * dw, y + 0.5 * dw * k1);
  Complex k3 = rhs(chart, c, w0 + 0.5 * dw, y + 0.5 * dw * k2);
  Complex k4 = rhs(chart, c, w0 + dw, y + dw * k3);
  return y + dw * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
}

}  // namespace

RiccatiState riccati_integrate(double c, Complex from, Complex F_from, Complex to,
                               const RiccatiOptions& opts) {
  RiccatiState st;
  st.min_im_F = F_from.imag();
  Complex delta = to - from;
  double length = std::abs(delta);
  if (opts.require_upper && !(F_from.imag() > 0.0))
    throw LeftDomainError("continuation starts with Im F <= 0", from);
  if (length == 0.0) {
    st.F = F_from;
    st.dF = from * F_from - F_from * F_from - c;
    return st;
  }
  int chart = std::abs(F_from) > 1.0 ? 1 : 0;
  Complex y = chart == 0 ? F_from : 1.0 / F_from;
  double s = 0.0;
  double h = std::min(1.0, 0.05 / std::max(1.0, length));
  while (s < 1.0) {
    if (st.steps >= opts.max_steps) throw ContinuationError("Riccati step budget exhausted", from + s * delta);
    h = std::min(h, 1.0 - s);
    Complex w0 = from + s * delta;
    Complex dw = h * delta;
    Complex big = rk4(chart, c, w0, dw, y);
    Complex half = rk4(chart, c, w0, 0.5 * dw, y);
    Complex two = rk4(chart, c, w0 + 0.5 * dw, 0.5 * dw, half);
    double scale = std::max(1.0, std::abs(two));
    double err = std::abs(two - big) / 15.0;
    double change = std::abs(two - y);
    bool finite = std::isfinite(two.real()) && std::isfinite(two.imag());
    if (!finite || err > opts.tol * scale || change > opts.max_step_change * scale) {
      double shrink = 0.5;
      if (finite && err > 0.0) shrink = std::clamp(0.9 * std::pow(opts.tol * scale / err, 0.2), 0.1, 0.5);
      h *= shrink;
      if (h * length < 1e-14 * std::max(1.0, std::abs(w0)))
        throw ContinuationError("Riccati step size underflow near a singularity", w0);
      continue;
    }
    y = two + (two - big) / 15.0;
    s += h;
    ++st.steps;
    st.est_error += err;
    if (std::abs(y) > 2.0) {
      y = 1.0 / y;
      chart = 1 - chart;
    }
    Complex F = chart == 0 ? y : 1.0 / y;
    st.min_im_F = std::min(st.min_im_F, F.imag());
    if (opts.require_upper && !(F.imag() > 0.0))
      throw LeftDomainError("continuation left the region where Im F > 0", from + s * delta);
    double grow = err > 0.0 ? 0.9 * std::pow(opts.tol * scale / err, 0.2) : 2.0;
    h *= std::clamp(grow, 1.0, 2.0);
  }
  st.F = chart == 0 ? y : 1.0 / y;
  st.dF = to * st.F - st.F * st.F - c;
  return st;
}

}  // namespace freeprob
