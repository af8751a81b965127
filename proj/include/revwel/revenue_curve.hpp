#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "revwel/dist.hpp"
#include "revwel/errors.hpp"

namespace revwel {

struct CurveNode {
  double value;  ///< x
  double phi;    ///< phi(x) on `grid()`, ironed phi on `ironed()`
};

/// Revenue curve R(q) = q * F^{-1}(1 - q) of one distribution sampled on a
/// uniform quantile grid q_j = j / N, its concave majorant, and the ironed
/// virtual values read off the majorant's slopes.
///
/// Between adjacent hull vertices the curve is locally concave and the
/// ironed value is the exact virtual value (clamped to the supergradient
/// interval of the hull), so regular distributions reproduce phi exactly.
/// Inside a hull segment that skips grid nodes the ironed value is the
/// segment slope.
class VirtualValueCurve {
public:
  static constexpr std::size_t kDefaultGrid = 4096;

  explicit VirtualValueCurve(Distribution dist, std::size_t grid_size = kDefaultGrid)
      : dist_(std::move(dist)), n_(grid_size) {
    if (n_ < 16) throw std::invalid_argument("ironing grid needs at least 16 cells");
    build();
    locate_monopoly();
  }

  const Distribution& distribution() const noexcept { return dist_; }
  std::size_t grid_size() const noexcept { return n_; }

  /// (x, phi(x)) at the grid nodes in increasing x; phi is NaN where undefined.
  std::vector<CurveNode> grid() const {
    std::vector<CurveNode> out;
    out.reserve(n_ + 1);
    for (std::size_t j = n_ + 1; j-- > 0;) out.push_back({x_[j], raw_phi_[j]});
    return out;
  }

  /// (x, ironed phi(x)) at the grid nodes in increasing x.
  std::vector<CurveNode> ironed() const {
    std::vector<CurveNode> out;
    out.reserve(n_ + 1);
    for (std::size_t j = n_ + 1; j-- > 0;) out.push_back({x_[j], node_phi_[j]});
    return out;
  }

  double monopoly_price() const noexcept { return price_; }
  double monopoly_revenue() const noexcept { return revenue_; }

  /// Whether grid node j (ordered by quantile q = j / N) lies on the majorant.
  bool touches(std::size_t j) const noexcept { return vertex_[j]; }

  double revenue_at(std::size_t j) const noexcept { return r_[j]; }

  /// Ironed virtual value at x; clamps to the end nodes outside the support.
  double ironed_value(double x) const {
    if (x >= dist_.support_hi()) return node_phi_[0];
    if (x <= dist_.support_lo() && !dist_.is<Empirical>()) return node_phi_[n_];
    return at_survival(dist_.survival(x), x);
  }

  /// Same as ironed_value when the survival level s = Pr(X > x) is known.
  double at_survival(double s, double x) const {
    if (s >= 1.0) return node_phi_[n_];
    const auto cell = std::min<std::size_t>(static_cast<std::size_t>(std::max(s, 0.0) * static_cast<double>(n_)), n_ - 1);
    const std::size_t seg = segment_of_cell_[cell];
    const std::size_t a = hull_[seg];
    const std::size_t b = hull_[seg + 1];
    if (b - a > 1) return slope_[seg];
    // single-cell segment between nodes cell and cell + 1
    if (dist_.has_density() && x >= dist_.support_lo() && x <= dist_.support_hi()) {
      const double lower = node_phi_[cell + 1];
      const double upper = cell == 0 ? kInf : node_phi_[cell];
      return std::clamp(dist_.virtual_value(x), lower, upper);
    }
    const double t = std::clamp(s * static_cast<double>(n_) - static_cast<double>(cell), 0.0, 1.0);
    return node_phi_[cell] + t * (node_phi_[cell + 1] - node_phi_[cell]);
  }

private:
  void build() {
    const double nd = static_cast<double>(n_);
    x_.resize(n_ + 1);
    r_.resize(n_ + 1);
    raw_phi_.assign(n_ + 1, std::nan(""));
    for (std::size_t j = 0; j <= n_; ++j) {
      const double q = static_cast<double>(j) / nd;
      x_[j] = dist_.upper_quantile(q);
      r_[j] = j == 0 ? 0.0 : q * x_[j];
      if (dist_.has_density() && std::isfinite(x_[j])) raw_phi_[j] = dist_.virtual_value(x_[j]);
    }
    if (!dist_.has_finite_mean()) {
      // q F^{-1}(1-q) does not vanish as q -> 0; continue the curve flat
      if (r_[1] > r_[2] * (1.0 + 1e-9)) throw NumericFailure("unbounded monopoly revenue");
      r_[0] = r_[1];
    }

    // upper hull, monotone chain over increasing q
    const auto q = [nd](std::size_t j) { return static_cast<double>(j) / nd; };
    hull_.clear();
    for (std::size_t j = 0; j <= n_; ++j) {
      while (hull_.size() >= 2) {
        const std::size_t a = hull_[hull_.size() - 2];
        const std::size_t b = hull_.back();
        const double chord = r_[a] + (r_[j] - r_[a]) * (q(b) - q(a)) / (q(j) - q(a));
        if (r_[b] > chord + 1e-14 * std::max(1.0, std::abs(r_[b]))) break;
        hull_.pop_back();
      }
      hull_.push_back(j);
    }

    const std::size_t segs = hull_.size() - 1;
    slope_.resize(segs);
    segment_of_cell_.resize(n_);
    vertex_.assign(n_ + 1, false);
    for (std::size_t s = 0; s < segs; ++s) {
      const std::size_t a = hull_[s];
      const std::size_t b = hull_[s + 1];
      slope_[s] = (r_[b] - r_[a]) * nd / static_cast<double>(b - a);
      for (std::size_t c = a; c < b; ++c) segment_of_cell_[c] = s;
    }
    for (std::size_t s = 1; s < segs; ++s) {
      if (slope_[s] > slope_[s - 1] + 1e-9 * (1.0 + std::abs(slope_[s - 1])))
        throw NumericFailure("concave majorant slopes are not monotone");
    }
    for (std::size_t j : hull_) vertex_[j] = true;

    node_phi_.resize(n_ + 1);
    for (std::size_t s = 0; s < segs; ++s)
      for (std::size_t c = hull_[s] + 1; c < hull_[s + 1]; ++c) node_phi_[c] = slope_[s];
    for (std::size_t h = 0; h < hull_.size(); ++h) {
      const std::size_t j = hull_[h];
      const double left = h == 0 ? kInf : slope_[h - 1];
      const double right = h + 1 == hull_.size() ? -kInf : slope_[h];
      double v;
      if (dist_.has_density() && std::isfinite(raw_phi_[j])) {
        v = std::clamp(raw_phi_[j], right, left);
      } else if (std::isfinite(left) && std::isfinite(right)) {
        v = 0.5 * (left + right);
      } else {
        v = std::isfinite(left) ? left : right;
      }
      node_phi_[j] = v;
    }
  }

  void locate_monopoly() {
    double best_r = -kInf;
    for (std::size_t j = 0; j <= n_; ++j)
      if (std::isfinite(x_[j])) best_r = std::max(best_r, r_[j]);
    revenue_ = best_r;
    // ties go to the larger quantile, i.e. the lower price
    std::size_t best = n_;
    for (std::size_t j = n_ + 1; j-- > 0;) {
      if (std::isfinite(x_[j]) && r_[j] >= best_r - 1e-12 * std::max(1.0, std::abs(best_r))) {
        best = j;
        break;
      }
    }
    price_ = x_[best];

    const double lo = x_[std::min(best + 1, n_)];
    const double hi = best >= 1 && std::isfinite(x_[best - 1]) ? x_[best - 1] : price_;
    auto rev = [this](double p) { return p * dist_.survival(p); };
    const double tol = 1e-12 * std::max(1.0, std::abs(revenue_));

    // golden-section refinement between the neighbouring nodes
    if (hi > lo) {
      const double g = 0.5 * (std::sqrt(5.0) - 1.0);
      double a = lo;
      double b = hi;
      double c = b - g * (b - a);
      double d = a + g * (b - a);
      double fc = rev(c);
      double fd = rev(d);
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, b); ++it) {
        if (fc >= fd) {
          b = d;
          d = c;
          fd = fc;
          c = b - g * (b - a);
          fc = rev(c);
        } else {
          a = c;
          c = d;
          fc = fd;
          d = a + g * (b - a);
          fd = rev(d);
        }
      }
      const double p = 0.5 * (a + b);
      if (rev(p) > revenue_ + tol) {
        price_ = p;
        revenue_ = rev(p);
      }
    }

    // regular case: the monopoly price is the root of phi
    if (dist_.has_density() && hi > lo) {
      double a = lo;
      double b = hi;
      if (dist_.virtual_value(a) < 0.0 && dist_.virtual_value(b) > 0.0) {
        for (int it = 0; it < 200 && b - a > 0.0; ++it) {
          const double m = 0.5 * (a + b);
          if (m <= a || m >= b) break;
          (dist_.virtual_value(m) < 0.0 ? a : b) = m;
        }
        const double p = dist_.virtual_value(a) == 0.0 ? a : b;
        if (rev(p) >= revenue_ - tol) {
          price_ = p;
          revenue_ = std::max(revenue_, rev(p));
        }
      }
    }
  }

  Distribution dist_;
  std::size_t n_;
  std::vector<double> x_;         // node values, index j <-> q = j / N
  std::vector<double> r_;         // revenue curve
  std::vector<double> raw_phi_;   // phi at the nodes
  std::vector<double> node_phi_;  // ironed phi at the nodes
  std::vector<std::size_t> hull_;
  std::vector<double> slope_;
  std::vector<std::size_t> segment_of_cell_;
  std::vector<bool> vertex_;
  double price_ = 0.0;
  double revenue_ = 0.0;
};

/// Monopoly price r* and revenue rho = sup_p p (1 - F(p)).
struct Monopoly {
  double price;
  double revenue;
};

inline Monopoly monopoly(const Distribution& d, std::size_t grid_size = VirtualValueCurve::kDefaultGrid) {
  const VirtualValueCurve curve(d, grid_size);
  return {curve.monopoly_price(), curve.monopoly_revenue()};
}

inline double ironed_virtual_value(const Distribution& d, double x, std::size_t grid_size) {
  return VirtualValueCurve(d, grid_size).ironed_value(x);
}

}  // namespace revwel
