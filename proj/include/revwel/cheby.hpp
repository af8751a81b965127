#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "revwel/anticonc.hpp"
#include "revwel/classify.hpp"
#include "revwel/errors.hpp"
#include "revwel/mech.hpp"
#include "revwel/parallel.hpp"
#include "revwel/quadrature.hpp"
#include "revwel/rng.hpp"
#include "revwel/sim.hpp"
#include "revwel/stats.hpp"

namespace revwel {

using RealFn = std::function<double(double)>;

/// f, g non-decreasing, h >= 0, and the random variable they are applied to.
struct MonotoneTriple {
  RealFn f;
  RealFn g;
  RealFn h;
  RandomVariableModel x;
  std::vector<double> kinks;  ///< values where f, g or h jump or bend (quadrature breakpoints)
};

struct ChebyshevResult {
  double lhs = 0.0;  ///< E[fgh] / E[gh]
  double rhs = 0.0;  ///< E[fh] / E[h]
  bool ok = false;
  bool f_monotone = true;
  bool g_monotone = true;
  bool h_nonnegative = true;
  bool hypotheses_hold() const { return f_monotone && g_monotone && h_nonnegative; }
};

namespace detail {

struct FourMoments {
  double fgh = 0.0;
  double gh = 0.0;
  double fh = 0.0;
  double h = 0.0;
};

// Expectations E[k(X)] over a model: exact sums or quadrature in survival space.
template <class Acc>
FourMoments moments_of(const MonotoneTriple& t, Acc&& expect) {
  FourMoments m;
  m.fgh = expect([&](double x) { return t.f(x) * t.g(x) * t.h(x); });
  m.gh = expect([&](double x) { return t.g(x) * t.h(x); });
  m.fh = expect([&](double x) { return t.f(x) * t.h(x); });
  m.h = expect([&](double x) { return t.h(x); });
  return m;
}

}  // namespace detail

/// E[fgh]/E[gh] >= E[fh]/E[h]. Finite models are summed exactly; analytic
/// ones are integrated, and the hypotheses are checked on `grid_size`
/// quantile nodes.
inline ChebyshevResult weighted_ratio_inequality(const MonotoneTriple& t, std::size_t grid_size = 1024) {
  const auto x = detail::normalize(t.x);
  std::vector<double> nodes;
  detail::FourMoments m;
  if (auto fin = std::get_if<FiniteModel>(&x)) {
    for (const auto& a : fin->atoms()) nodes.push_back(a.value);
    m = detail::moments_of(t, [&](auto&& k) {
      double total = 0.0;
      for (const auto& a : fin->atoms()) total += k(a.value) * a.prob;
      return total;
    });
  } else {
    const auto& an = std::get<AnalyticModel>(x);
    detail::require_finite_mean(an);
    const auto& d = an.dist;
    auto value = [&](double u) { return an.shift + an.scale * u; };
    for (std::size_t k = 0; k < grid_size; ++k)
      nodes.push_back(value(d.quantile((static_cast<double>(k) + 0.5) / static_cast<double>(grid_size))));
    std::sort(nodes.begin(), nodes.end());
    // kinks given in model values, mapped back to survival levels of X
    std::vector<double> breaks;
    for (double kv : t.kinks) {
      if (an.scale == 0.0) break;
      const double u = (kv - an.shift) / an.scale;
      if (u > d.support_lo() && u < d.support_hi()) breaks.push_back(d.survival(u));
    }
    m = detail::moments_of(t, [&](auto&& k) { return d.expect([&](double u) { return k(value(u)); }, breaks); });
  }

  ChebyshevResult r;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    r.h_nonnegative = r.h_nonnegative && t.h(nodes[i]) >= 0.0;
    if (i == 0) continue;
    const double f0 = t.f(nodes[i - 1]);
    const double g0 = t.g(nodes[i - 1]);
    r.f_monotone = r.f_monotone && t.f(nodes[i]) >= f0 - monotone_slack(f0);
    r.g_monotone = r.g_monotone && t.g(nodes[i]) >= g0 - monotone_slack(g0);
  }
  if (!(m.gh > 0.0) || !(m.h > 0.0)) throw DegenerateDenominator("E[gh] and E[h] must be positive");
  r.lhs = m.fgh / m.gh;
  r.rhs = m.fh / m.h;
  r.ok = r.lhs >= r.rhs - 1e-9 * (1.0 + std::abs(r.rhs));
  return r;
}

/// Continuous piecewise-linear function through (xs[k], ys[k]), flat outside.
struct PiecewiseLinear {
  std::vector<double> xs;
  std::vector<double> ys;

  double operator()(double x) const {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x) - xs.begin());
    const double t = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    return ys[k - 1] + t * (ys[k] - ys[k - 1]);
  }
};

/// levels[k] on [cuts[k-1], cuts[k]), with levels.size() == cuts.size() + 1.
struct StepFunction {
  std::vector<double> cuts;
  std::vector<double> levels;

  double operator()(double x) const {
    return levels[static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x) - cuts.begin())];
  }
};

/// A random triple on [0, 10]: non-decreasing piecewise-linear f (any sign)
/// and g (> 0), non-negative step h with some zero pieces, and a finite X
/// with 2 to 12 atoms carrying positive E[h(X)].
inline MonotoneTriple random_monotone_triple(CounterEngine& rng) {
  auto monotone = [&](double start) {
    PiecewiseLinear p;
    const auto knots = 2 + rng.below(5);
    double x = 0.0;
    double y = start;
    for (std::uint64_t k = 0; k < knots; ++k) {
      p.xs.push_back(x);
      p.ys.push_back(y);
      x += rng.uniform(0.5, 4.0);
      // flat pieces on purpose: equality cases stress the tolerance
      y += rng.uniform() < 0.3 ? 0.0 : rng.uniform(0.0, 3.0);
    }
    return p;
  };
  for (;;) {
    const auto f = monotone(rng.uniform(-5.0, 5.0));
    const auto g = monotone(rng.uniform(0.05, 2.0));
    StepFunction h;
    const auto pieces = 1 + rng.below(4);
    double cut = 0.0;
    for (std::uint64_t k = 0; k + 1 < pieces; ++k) h.cuts.push_back(cut += rng.uniform(0.5, 4.0));
    for (std::uint64_t k = 0; k < pieces; ++k) h.levels.push_back(rng.uniform() < 0.25 ? 0.0 : rng.uniform(0.0, 2.0));
    std::vector<Atom> atoms;
    const auto n_atoms = 2 + rng.below(11);
    for (std::uint64_t k = 0; k < n_atoms; ++k) atoms.push_back({rng.uniform(0.0, 10.0), rng.uniform(0.01, 1.0)});
    auto x = FiniteModel::from_weights(std::move(atoms));
    double eh = 0.0;
    for (const auto& a : x.atoms()) eh += h(a.value) * a.prob;
    if (eh > 1e-6) return {f, g, h, std::move(x), {}};
  }
}

// ---------------------------------------------------------------------------
// Per-bidder audit of E[phi_i(v_i)^+ 1{i in opt}] >= E[v_i 1{i in opt}] / c.

constexpr std::size_t kAuditBins = 32;

struct AgentAudit {
  std::vector<EstimateWithCI> g;  ///< Pr(i served | u_i in bin), by quantile bin
  bool g_monotone = true;         ///< adjacent drops all within 2 SE
  EstimateWithCI virtual_part;    ///< E[phi^+ 1{served}]
  EstimateWithCI value_part;      ///< E[v 1{served}] / c
  EstimateWithCI difference;      ///< paired difference of the two
  bool ok() const { return difference.mean >= -3.0 * difference.std_error - 1e-12; }
};

struct HyperRegularAudit {
  bool skipped = false;
  std::string reason;
  double c = 0.0;
  std::vector<AgentAudit> agents;
  EstimateWithCI virtual_total;  ///< E[phi^+(opt)]
  EstimateWithCI value_total;    ///< E[v(opt)] / c
  EstimateWithCI difference;
  bool ok() const {
    if (skipped) return true;
    bool all = difference.mean >= -3.0 * difference.std_error - 1e-12;
    for (const auto& a : agents) all = all && a.ok() && a.g_monotone;
    return all;
  }
};

namespace detail {

struct AuditAcc {
  std::vector<Moments> served_by_bin;  // agent-major, kAuditBins per agent
  std::vector<Moments> virt, val, diff;
  Moments virt_total, val_total, diff_total;

  void init(std::size_t n) {
    served_by_bin.assign(n * kAuditBins, {});
    virt.assign(n, {});
    val.assign(n, {});
    diff.assign(n, {});
  }

  void merge(const AuditAcc& o) {
    if (served_by_bin.empty()) {
      *this = o;
      return;
    }
    for (std::size_t k = 0; k < served_by_bin.size(); ++k) served_by_bin[k].merge(o.served_by_bin[k]);
    for (std::size_t i = 0; i < virt.size(); ++i) {
      virt[i].merge(o.virt[i]);
      val[i].merge(o.val[i]);
      diff[i].merge(o.diff[i]);
    }
    virt_total.merge(o.virt_total);
    val_total.merge(o.val_total);
    diff_total.merge(o.diff_total);
  }
};

}  // namespace detail

/// Monte Carlo audit on a downward-closed environment whose agents are
/// hyper-regular and c-bounded; any other input is reported as skipped.
inline HyperRegularAudit hyper_regular_audit(const Market& m, double c, std::uint64_t n_samples,
                                             std::uint64_t seed) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  HyperRegularAudit out;
  out.c = c;
  if (!m.env().is_downward_closed()) {
    out.skipped = true;
    out.reason = "environment is not downward-closed";
    return out;
  }
  for (std::size_t i = 0; i < m.size(); ++i) {
    const auto rep = classify(m.dist(i), c);
    if (!rep.hyper_regular || !rep.c_bounded) {
      out.skipped = true;
      out.reason = std::string("agent distribution ") + std::string(m.dist(i).name()) +
                   (rep.hyper_regular ? " is not c-bounded" : " is not hyper-regular");
      return out;
    }
  }
  if (n_samples < kMinSamples) throw std::invalid_argument("at least 1000 samples are required");

  const std::size_t n = m.size();
  const auto acc = reduce_chunks<detail::AuditAcc>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
    detail::AuditAcc part;
    part.init(n);
    std::vector<double> v(n);
    std::vector<double> u(n);
    for (std::uint64_t k = b; k < e; ++k) {
      const SampleStream stream(seed, k);
      for (std::size_t i = 0; i < n; ++i) {
        u[i] = stream.uniform(i);
        v[i] = m.dist(i).sample_at(u[i]);
      }
      const AgentMask opt = optimal_outcome(m, v).served;
      double vt = 0.0;
      double wt = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const bool in = contains(opt, i);
        const auto bin = std::min<std::size_t>(kAuditBins - 1, static_cast<std::size_t>(u[i] * kAuditBins));
        part.served_by_bin[i * kAuditBins + bin].add(in ? 1.0 : 0.0);
        const double phi_plus = in ? std::max(0.0, m.dist(i).virtual_value(v[i])) : 0.0;
        const double val = in ? v[i] / c : 0.0;
        part.virt[i].add(phi_plus);
        part.val[i].add(val);
        part.diff[i].add(phi_plus - val);
        vt += phi_plus;
        wt += val;
      }
      part.virt_total.add(vt);
      part.val_total.add(wt);
      part.diff_total.add(vt - wt);
    }
    return part;
  });

  for (std::size_t i = 0; i < n; ++i) {
    AgentAudit a;
    for (std::size_t bin = 0; bin < kAuditBins; ++bin) a.g.push_back(acc.served_by_bin[i * kAuditBins + bin].estimate(seed));
    for (std::size_t bin = 1; bin < kAuditBins; ++bin) {
      const auto& lo = a.g[bin - 1];
      const auto& hi = a.g[bin];
      const double se = std::hypot(lo.std_error, hi.std_error);
      a.g_monotone = a.g_monotone && hi.mean >= lo.mean - 2.0 * se - 1e-12;
    }
    a.virtual_part = acc.virt[i].estimate(seed);
    a.value_part = acc.val[i].estimate(seed);
    a.difference = acc.diff[i].estimate(seed);
    out.agents.push_back(std::move(a));
  }
  out.virtual_total = acc.virt_total.estimate(seed);
  out.value_total = acc.val_total.estimate(seed);
  out.difference = acc.diff_total.estimate(seed);
  return out;
}

}  // namespace revwel
