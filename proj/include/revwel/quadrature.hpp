#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace revwel::quad {

constexpr double kRelTol = 1e-12;
constexpr unsigned kMaxDepth = 18;

/// Adaptive Gauss-Kronrod on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = kRelTol) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, kMaxDepth, rel_tol);
}

/// Integrates over [a, b] split at the interior breakpoints (kinks, jumps).
template <class F>
double integrate_pieces(F&& f, double a, double b, std::span<const double> breaks,
                        double rel_tol = kRelTol) {
  std::vector<double> cuts{a};
  for (double x : breaks)
    if (x > a && x < b) cuts.push_back(x);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate(f, cuts[i], cuts[i + 1], rel_tol);
  return total;
}

/// \int_0^{s0} g(s) ds for integrands that may blow up as s -> 0 (upper tails
/// written in survival space). Substitutes s = exp(-1/w), which maps the
/// logarithmic tails of heavy distributions onto a bounded integrand.
template <class G>
double integrate_near_zero(G&& g, double s0, double rel_tol = kRelTol) {
  const double w0 = -1.0 / std::log(s0);
  auto h = [&](double w) {
    if (w <= 0.0) return 0.0;
    const double s = std::exp(-1.0 / w);
    if (s <= 0.0) return 0.0;
    const double v = g(s) * s / (w * w);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(h, 0.0, w0, rel_tol);
}

/// \int_0^1 g(s) ds with the tail below s0 handled by integrate_near_zero and
/// the remainder split at `breaks`.
template <class G>
double integrate_unit(G&& g, std::span<const double> breaks, double s0 = 1e-3,
                      double rel_tol = kRelTol) {
  std::vector<double> inner;
  std::vector<double> tail;
  for (double b : breaks) (b > s0 ? inner : tail).push_back(b);
  double total = integrate_pieces(g, s0, 1.0, inner, rel_tol);
  if (tail.empty()) return total + integrate_near_zero(g, s0, rel_tol);
  // a kink inside the tail region: integrate that stretch directly
  std::sort(tail.begin(), tail.end());
  const double lo = tail.front();
  total += integrate_pieces(g, lo, s0, tail, rel_tol);
  return total + integrate_near_zero(g, lo, rel_tol);
}

}  // namespace revwel::quad
