#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "revwel/dist.hpp"
#include "revwel/env.hpp"
#include "revwel/errors.hpp"
#include "revwel/revenue_curve.hpp"

namespace revwel {

enum class MechanismId { Efficient, Optimal, VcgL };

inline std::string_view to_string(MechanismId m) noexcept {
  switch (m) {
    case MechanismId::Efficient: return "efficient";
    case MechanismId::Optimal: return "optimal";
    case MechanismId::VcgL: return "vcg_l";
  }
  return "?";
}

inline MechanismId parse_mechanism(std::string_view s) {
  if (s == "efficient") return MechanismId::Efficient;
  if (s == "optimal") return MechanismId::Optimal;
  if (s == "vcg_l") return MechanismId::VcgL;
  throw ConfigError("unknown mechanism id '" + std::string(s) + "'");
}

struct MechanismOutcome {
  AgentMask served = 0;
  std::vector<double> payments;  ///< empty on the optimal fast path
  double welfare = 0.0;
  double virtual_revenue = 0.0;

  double revenue() const {
    double total = 0.0;
    for (double p : payments) total += p;
    return total;
  }
};

/// An environment together with one value distribution per agent and the
/// precomputed ironed virtual value curves the mechanisms need.
class Market {
public:
  Market(FeasibilityEnvironment env, std::vector<Distribution> dists,
         std::size_t grid_size = VirtualValueCurve::kDefaultGrid)
      : env_(std::move(env)) {
    if (dists.size() == 1 && env_.size() > 1) dists.assign(env_.size(), dists.front());
    if (dists.size() != env_.size()) throw ConfigError("need one distribution per agent");
    curves_.reserve(dists.size());
    // agents sharing a distribution share one curve
    for (std::size_t i = 0; i < dists.size(); ++i) {
      std::shared_ptr<const VirtualValueCurve> shared;
      for (std::size_t j = 0; j < i; ++j) {
        if (same_kind(dists[j], dists[i])) {
          shared = curves_[j];
          break;
        }
      }
      curves_.push_back(shared ? shared : std::make_shared<const VirtualValueCurve>(dists[i], grid_size));
    }
  }

  const FeasibilityEnvironment& env() const noexcept { return env_; }
  std::size_t size() const noexcept { return env_.size(); }
  const Distribution& dist(std::size_t i) const { return curves_[i]->distribution(); }
  const VirtualValueCurve& curve(std::size_t i) const { return *curves_[i]; }

  /// Lazy reserve r_i = phi_i^{-1}(0), the monopoly price.
  double reserve(std::size_t i) const { return curves_[i]->monopoly_price(); }

  double ironed(std::size_t i, double v) const { return curves_[i]->ironed_value(v); }

  std::vector<double> ironed_profile(std::span<const double> v) const {
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = ironed(i, v[i]);
    return out;
  }

  /// Highest bid considered by threshold searches.
  double bid_ceiling(std::size_t i) const {
    const auto& d = dist(i);
    return std::isfinite(d.support_hi()) ? d.support_hi() : d.upper_quantile(kTailTruncation);
  }

private:
  static bool same_kind(const Distribution& a, const Distribution& b) {
    if (a.kind().index() != b.kind().index()) return false;
    return std::visit(
        [&](const auto& ka) {
          using K = std::decay_t<decltype(ka)>;
          const auto& kb = std::get<K>(b.kind());
          if constexpr (std::is_same_v<K, Uniform>) return ka.lo == kb.lo && ka.hi == kb.hi;
          else if constexpr (std::is_same_v<K, Exponential>) return ka.rate == kb.rate;
          else if constexpr (std::is_same_v<K, Pareto>) return ka.alpha == kb.alpha && ka.scale == kb.scale;
          else if constexpr (std::is_same_v<K, Empirical>) return ka.sorted == kb.sorted;
          else return true;
        },
        a.kind());
  }

  FeasibilityEnvironment env_;
  std::vector<std::shared_ptr<const VirtualValueCurve>> curves_;
};

namespace detail {

inline void check_profile(const Market& m, std::span<const double> v) {
  if (v.size() != m.size()) throw std::invalid_argument("value profile length differs from agent count");
  for (double x : v)
    if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("values must be finite and non-negative");
}

inline double served_sum(AgentMask s, std::span<const double> w) { return mask_weight(s, w); }

// Clarke pivot payments for the welfare-maximizing set `served`.
inline std::vector<double> clarke_payments(const FeasibilityEnvironment& env, std::span<const double> v,
                                           AgentMask served, double welfare) {
  std::vector<double> pay(v.size(), 0.0);
  std::vector<double> w(v.begin(), v.end());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!contains(served, i)) continue;
    w[i] = 0.0;
    const double others_best = env.max_weight_set(w).weight;
    w[i] = v[i];
    pay[i] = std::clamp(others_best - (welfare - v[i]), 0.0, v[i]);
  }
  return pay;
}

}  // namespace detail

/// VCG: serve the welfare-maximizing feasible set, charge Clarke pivot payments.
inline MechanismOutcome efficient_outcome(const Market& m, std::span<const double> v) {
  detail::check_profile(m, v);
  const auto best = m.env().max_weight_set(v);
  MechanismOutcome out;
  out.served = best.set;
  out.welfare = detail::served_sum(best.set, v);
  out.payments = detail::clarke_payments(m.env(), v, best.set, out.welfare);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (contains(best.set, i)) out.virtual_revenue += m.ironed(i, v[i]);
  return out;
}

/// Ironed virtual surplus maximization. A non-empty set is served when its
/// ironed virtual surplus is >= 0 or when the empty set is infeasible.
inline MechanismOutcome optimal_outcome(const Market& m, std::span<const double> v) {
  detail::check_profile(m, v);
  const auto phi = m.ironed_profile(v);
  MechanismOutcome out;
  const auto best = m.env().max_weight_nonempty(phi);
  if (best && (best->weight >= 0.0 || !m.env().contains_empty())) {
    out.served = best->set;
    out.virtual_revenue = best->weight;
  }
  out.welfare = detail::served_sum(out.served, v);
  return out;
}

/// VCG with lazy reserves: VCG winners below their reserve are dropped, the
/// rest pay max(reserve, VCG payment).
inline MechanismOutcome vcg_l_outcome(const Market& m, std::span<const double> v) {
  const auto vcg = efficient_outcome(m, v);
  MechanismOutcome out;
  out.payments.assign(v.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!contains(vcg.served, i) || v[i] < m.reserve(i)) continue;
    out.served |= AgentMask{1} << i;
    out.payments[i] = std::max(m.reserve(i), vcg.payments[i]);
    out.virtual_revenue += m.ironed(i, v[i]);
  }
  if (!m.env().is_feasible(out.served))
    throw NotDownwardClosed("lazy reserve removal left an infeasible set");
  out.welfare = detail::served_sum(out.served, v);
  return out;
}

inline MechanismOutcome outcome(const Market& m, MechanismId id, std::span<const double> v) {
  switch (id) {
    case MechanismId::Efficient: return efficient_outcome(m, v);
    case MechanismId::Optimal: return optimal_outcome(m, v);
    case MechanismId::VcgL: return vcg_l_outcome(m, v);
  }
  return {};
}

/// Threshold payments: for each winner, the lowest bid (others fixed) at
/// which it is still served, found by 60 bisection steps between the bottom
/// of its support and its value.
inline std::vector<double> payment_audit(const Market& m, MechanismId id, std::span<const double> v) {
  detail::check_profile(m, v);
  std::vector<double> bids(v.begin(), v.end());
  std::vector<double> pay(v.size(), 0.0);
  auto served = [&](std::size_t i, double b) {
    bids[i] = b;
    const bool in = contains(outcome(m, id, bids).served, i);
    bids[i] = v[i];
    return in;
  };
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!served(i, v[i])) continue;
    const double ceiling = m.bid_ceiling(i);
    if (ceiling > v[i] && !served(i, ceiling))
      throw NonMonotoneAllocation("agent served at its value but not at a higher bid");
    double lo = std::min(m.dist(i).support_lo(), v[i]);
    if (served(i, lo)) {
      pay[i] = lo;
      continue;
    }
    double hi = v[i];
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (served(i, mid) ? hi : lo) = mid;
    }
    pay[i] = hi;
  }
  return pay;
}

}  // namespace revwel
