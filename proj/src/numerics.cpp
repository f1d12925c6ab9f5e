#include "freeprob/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace freeprob::numerics {

namespace {

constexpr unsigned kMaxDepth = 18;

std::vector<double> pieces(double a, double b, const std::vector<double>& breakpoints) {
  std::vector<double> cuts{a};
  std::vector<double> inner;
  for (double p : breakpoints)
    if (p > a && p < b) inner.push_back(p);
  std::sort(inner.begin(), inner.end());
  inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
  cuts.insert(cuts.end(), inner.begin(), inner.end());
  cuts.push_back(b);
  return cuts;
}

// On a finite piece, t = mid - half cos(theta) turns (t - a)^{-1/2} endpoint behaviour
// (Marchenko-Pastur, arcsine) into a bounded integrand.
template <class T, class F>
std::pair<T, double> gk(F&& f, double a, double b, double tol) {
  double err = 0.0;
  T v;
  if (std::isfinite(a) && std::isfinite(b)) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto g = [&](double th) -> T {
      double t = std::clamp(mid - half * std::cos(th), a, b);
      double w = half * std::sin(th);
      return w == 0.0 ? T{} : T(f(t) * w);
    };
    v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, 0.0, kPi, kMaxDepth, tol, &err);
  } else {
    v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kMaxDepth, tol, &err);
  }
  return {v, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                     const std::vector<double>& breakpoints) {
  if (a == b) return {};
  if (a > b) {
    QuadResult r = integrate(f, b, a, tol, breakpoints);
    return {-r.value, r.error};
  }
  QuadResult out;
  auto cuts = pieces(a, b, breakpoints);
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto [v, e] = gk<double>(f, cuts[k], cuts[k + 1], tol);
    out.value += v;
    out.error += e;
  }
  if (!std::isfinite(out.value)) throw QuadratureError("quadrature produced a non-finite value");
  return out;
}

ComplexQuadResult integrate_complex(const std::function<Complex(double)>& f, double a, double b,
                                    double tol, const std::vector<double>& breakpoints) {
  if (a == b) return {};
  if (a > b) {
    ComplexQuadResult r = integrate_complex(f, b, a, tol, breakpoints);
    return {-r.value, r.error};
  }
  ComplexQuadResult out;
  auto cuts = pieces(a, b, breakpoints);
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    auto [v, e] = gk<Complex>(f, cuts[k], cuts[k + 1], tol);
    out.value += v;
    out.error += e;
  }
  if (!std::isfinite(out.value.real()) || !std::isfinite(out.value.imag()))
    throw QuadratureError("quadrature produced a non-finite value");
  return out;
}

unsigned thread_count() {
  if (const char* env = std::getenv("FREEPROB_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<unsigned>(std::min<long>(n, 256));
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  unsigned workers = static_cast<unsigned>(std::min<std::size_t>(thread_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace freeprob::numerics
