#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "revwel/dist.hpp"
#include "revwel/revenue_curve.hpp"

namespace revwel {

struct ClassificationReport {
  bool regular = false;
  bool hyper_regular = false;
  bool mhr = false;
  double c = 0.0;
  bool c_bounded = false;
  bool strongly_c_bounded = false;
  double mean = 0.0;  ///< +inf when divergent
  double rho = 0.0;
  double monopoly_price = 0.0;
};

/// Slack used by every monotonicity predicate on the checking grid.
inline double monotone_slack(double v) { return 1e-9 * (1.0 + std::abs(v)); }

/// Survival levels of the checking grid, decreasing (so values increase):
/// `grid_size` evenly spaced interior nodes plus log-spaced tail nodes down
/// to kTailTruncation.
inline std::vector<double> classification_levels(std::size_t grid_size) {
  std::vector<double> s;
  const double g = static_cast<double>(grid_size);
  for (std::size_t k = 0; k < grid_size; ++k) s.push_back(1.0 - (static_cast<double>(k) + 0.5) / g);
  const double tail_start = 0.5 / g;
  for (int m = 1;; ++m) {
    const double level = tail_start * std::pow(10.0, -0.25 * m);
    if (level < kTailTruncation) break;
    s.push_back(level);
  }
  s.push_back(kTailTruncation);
  std::sort(s.begin(), s.end(), std::greater<>());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

namespace detail {

template <class F>
bool non_decreasing_on(const std::vector<double>& xs, F&& f) {
  double prev = 0.0;
  bool first = true;
  for (double x : xs) {
    const double v = f(x);
    if (!first && v < prev - monotone_slack(prev)) return false;
    prev = v;
    first = false;
  }
  return true;
}

}  // namespace detail

/// Regularity, hyper-regularity and MHR on a quantile grid, plus the
/// c-boundedness predicates c * rho >= E[X] and support_hi <= c * rho.
inline ClassificationReport classify(const Distribution& d, double c, std::size_t grid_size = 256) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  if (grid_size < 64) throw std::invalid_argument("classification grid needs at least 64 nodes");

  ClassificationReport r;
  r.c = c;
  const VirtualValueCurve curve(d, std::max<std::size_t>(grid_size, 1024));
  r.rho = curve.monopoly_revenue();
  r.monopoly_price = curve.monopoly_price();
  r.mean = d.mean();

  if (d.has_density()) {
    std::vector<double> xs;
    for (double s : classification_levels(grid_size)) {
      const double x = d.upper_quantile(s);
      if (std::isfinite(x) && d.pdf(x) > 0.0) xs.push_back(x);
    }
    r.regular = detail::non_decreasing_on(xs, [&](double x) { return d.virtual_value(x); });
    std::vector<double> positive;
    std::copy_if(xs.begin(), xs.end(), std::back_inserter(positive), [](double x) { return x > 0.0; });
    r.hyper_regular = r.regular &&
                      detail::non_decreasing_on(positive, [&](double x) { return d.virtual_value(x) / x; });
    r.mhr = detail::non_decreasing_on(xs, [&](double x) { return d.hazard(x); });
  }

  const double cap = c * r.rho;
  r.c_bounded = std::isfinite(r.mean) && cap >= r.mean - monotone_slack(r.mean);
  const double hi = d.support_hi();
  r.strongly_c_bounded = std::isfinite(hi) && cap >= hi - monotone_slack(hi);
  return r;
}

}  // namespace revwel
