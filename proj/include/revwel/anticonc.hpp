#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "revwel/dist.hpp"
#include "revwel/errors.hpp"
#include "revwel/parallel.hpp"
#include "revwel/quadrature.hpp"
#include "revwel/rng.hpp"
#include "revwel/stats.hpp"

namespace revwel {

struct Atom {
  double value;
  double prob;
};

/// A discrete random variable; atoms sorted by value, equal values merged.
class FiniteModel {
public:
  explicit FiniteModel(std::vector<Atom> atoms) {
    if (atoms.empty()) throw ConfigError("finite model needs at least one atom");
    double total = 0.0;
    for (const auto& a : atoms) {
      if (!std::isfinite(a.value) || !(a.prob >= 0.0)) throw ConfigError("atoms need finite values and p >= 0");
      total += a.prob;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ConfigError("atom probabilities must sum to 1");
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    for (const auto& a : atoms) {
      if (a.prob == 0.0) continue;
      if (!atoms_.empty() && atoms_.back().value == a.value) atoms_.back().prob += a.prob;
      else atoms_.push_back(a);
    }
  }

  /// Equally weighted sample points.
  static FiniteModel uniform_over(std::span<const double> values) {
    std::vector<Atom> a;
    const double p = 1.0 / static_cast<double>(values.size());
    for (double v : values) a.push_back({v, p});
    return FiniteModel(std::move(a), Trusted{});
  }

  /// Atoms with non-negative weights, rescaled to total mass 1.
  static FiniteModel from_weights(std::vector<Atom> atoms) {
    double total = 0.0;
    for (const auto& a : atoms) total += a.prob;
    if (!(total > 0.0)) throw ConfigError("atom weights must have positive total");
    for (auto& a : atoms) a.prob /= total;
    return FiniteModel(std::move(atoms), Trusted{});
  }

  static FiniteModel rademacher() { return FiniteModel({{-1.0, 0.5}, {1.0, 0.5}}); }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  double mean() const {
    double m = 0.0;
    for (const auto& a : atoms_) m += a.value * a.prob;
    return m;
  }

  /// a + b X.
  FiniteModel affine(double a, double b) const {
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const auto& at : atoms_) out.push_back({a + b * at.value, at.prob});
    return FiniteModel(std::move(out), Trusted{});
  }

  /// Inverse CDF at u in (0,1).
  double sample_at(double u) const {
    double acc = 0.0;
    for (const auto& a : atoms_) {
      acc += a.prob;
      if (u < acc) return a.value;
    }
    return atoms_.back().value;
  }

private:
  struct Trusted {};
  // skips the probability-sum check, which rounding can break for derived models
  FiniteModel(std::vector<Atom> atoms, Trusted) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
    for (const auto& a : atoms) {
      if (!atoms_.empty() && atoms_.back().value == a.value) atoms_.back().prob += a.prob;
      else atoms_.push_back(a);
    }
  }

  std::vector<Atom> atoms_;
};

/// shift + scale * X for X drawn from a continuous distribution.
struct AnalyticModel {
  Distribution dist;
  double shift = 0.0;
  double scale = 1.0;
};

using RandomVariableModel = std::variant<FiniteModel, AnalyticModel>;

namespace detail {

// Empirical distributions are handled as finite models.
inline RandomVariableModel normalize(const RandomVariableModel& x) {
  if (auto a = std::get_if<AnalyticModel>(&x)) {
    if (auto e = std::get_if<Empirical>(&a->dist.kind()))
      return FiniteModel::uniform_over(e->sorted).affine(a->shift, a->scale);
  }
  return x;
}

// \int_lo^c F(x) dx = E[(c - X)^+].
inline double lower_partial(const Distribution& d, double c) {
  const double lo = d.support_lo();
  if (c <= lo) return 0.0;
  const double hi = std::isfinite(d.support_hi()) ? std::min(c, d.support_hi()) : c;
  double total = quad::integrate([&](double x) { return d.cdf(x); }, lo, hi);
  if (c > hi) total += c - hi;
  return total;
}

// E|X - c| = E X - c + 2 E[(c - X)^+]
inline double abs_deviation(const Distribution& d, double c) {
  return d.mean() - c + 2.0 * lower_partial(d, c);
}

inline void require_finite_mean(const AnalyticModel& a) {
  if (!a.dist.has_finite_mean()) throw InfiniteMean("model has an infinite mean");
}

}  // namespace detail

inline double model_mean(const RandomVariableModel& x) {
  const auto nx = detail::normalize(x);
  if (auto f = std::get_if<FiniteModel>(&nx)) return f->mean();
  const auto& a = std::get<AnalyticModel>(nx);
  detail::require_finite_mean(a);
  return a.shift + a.scale * a.dist.mean();
}

/// E[X^+].
inline double positive_part_mean(const RandomVariableModel& x) {
  const auto nx = detail::normalize(x);
  if (auto f = std::get_if<FiniteModel>(&nx)) {
    double z = 0.0;
    for (const auto& a : f->atoms()) z += std::max(0.0, a.value) * a.prob;
    return z;
  }
  const auto& a = std::get<AnalyticModel>(nx);
  detail::require_finite_mean(a);
  if (a.scale == 0.0) return std::max(0.0, a.shift);
  const double c = -a.shift / a.scale;
  const double below = detail::lower_partial(a.dist, c);
  // b > 0: b E[(X - c)^+];  b < 0: |b| E[(c - X)^+]
  if (a.scale > 0.0) return a.scale * (a.dist.mean() - c + below);
  return -a.scale * below;
}

struct MedianStats {
  double median;  ///< lower median
  double md;      ///< E|X - E X|
  double mdm;     ///< E|X - m(X)|
};

inline MedianStats median_md_mdm(const RandomVariableModel& x) {
  const auto nx = detail::normalize(x);
  if (auto f = std::get_if<FiniteModel>(&nx)) {
    const auto& atoms = f->atoms();
    double acc = 0.0;
    double m = atoms.back().value;
    for (const auto& a : atoms) {
      acc += a.prob;
      if (acc >= 0.5 - 1e-15) {
        m = a.value;
        break;
      }
    }
    const double mu = f->mean();
    MedianStats s{m, 0.0, 0.0};
    for (const auto& a : atoms) {
      s.md += std::abs(a.value - mu) * a.prob;
      s.mdm += std::abs(a.value - m) * a.prob;
    }
    return s;
  }
  const auto& a = std::get<AnalyticModel>(nx);
  detail::require_finite_mean(a);
  const double mx = a.dist.quantile(0.5);
  const double b = std::abs(a.scale);
  return {a.shift + a.scale * mx, b * detail::abs_deviation(a.dist, a.dist.mean()),
          b * detail::abs_deviation(a.dist, mx)};
}

/// a + b X for either model form.
inline RandomVariableModel affine(const RandomVariableModel& x, double a, double b) {
  if (auto f = std::get_if<FiniteModel>(&x)) return f->affine(a, b);
  const auto& an = std::get<AnalyticModel>(x);
  return AnalyticModel{an.dist, a + b * an.shift, b * an.scale};
}

struct RelationCheck {
  MedianStats stats;
  bool chain_ok = false;  ///< MDM <= MD <= 2 MDM
  bool shift_ok = false;  ///< MDM(X - a) = MDM(a - X) = MDM(X), same for MD
  double worst_shift_error = 0.0;
  bool ok() const { return chain_ok && shift_ok; }
};

/// MDM <= MD <= 2 MDM and invariance of both under X - a and a - X for
/// `n_shifts` random a.
inline RelationCheck mdm_md_relation_check(const RandomVariableModel& x, std::uint64_t seed = 42,
                                           int n_shifts = 20) {
  constexpr double tol = 1e-9;
  RelationCheck r;
  r.stats = median_md_mdm(x);
  const auto& s = r.stats;
  r.chain_ok = s.mdm <= s.md + tol * (1.0 + s.md) && s.md <= 2.0 * s.mdm + tol * (1.0 + s.md);
  CounterEngine rng(seed, 0);
  const double spread = 1.0 + std::abs(s.median) + s.md;
  for (int k = 0; k < n_shifts; ++k) {
    const double a = rng.uniform(-10.0, 10.0) * spread;
    for (double sign : {1.0, -1.0}) {
      // sign = +1: X - a;  sign = -1: a - X
      const auto t = median_md_mdm(affine(x, -sign * a, sign));
      r.worst_shift_error = std::max({r.worst_shift_error, std::abs(t.mdm - s.mdm) / (1.0 + s.mdm),
                                      std::abs(t.md - s.md) / (1.0 + s.md)});
    }
  }
  r.shift_ok = r.worst_shift_error <= tol;
  return r;
}

// ---------------------------------------------------------------------------
// Medially coupled signs.

/// E[X | eps = +1] and E[X | eps = -1] for the fair sign eps with
/// eps (X - m) >= 0; mass at the median is split so both signs get 1/2.
struct CoupledMeans {
  double plus;
  double minus;
};

inline CoupledMeans coupled_means(const FiniteModel& x) {
  const double m = median_md_mdm(x).median;
  double above = 0.0;
  double above_mass = 0.0;
  double below = 0.0;
  double at_mass = 0.0;
  for (const auto& a : x.atoms()) {
    if (a.value > m) {
      above += a.value * a.prob;
      above_mass += a.prob;
    } else if (a.value < m) {
      below += a.value * a.prob;
    } else {
      at_mass = a.prob;
    }
  }
  const double alpha = 0.5 - above_mass;  // median mass sent to +1
  if (alpha < -1e-12 || alpha > at_mass + 1e-12) throw NumericFailure("median atom cannot be split");
  return {2.0 * (above + alpha * m), 2.0 * (below + (at_mass - alpha) * m)};
}

/// E(sigma) = sum_i E[X_i | eps_i = sigma_i] for every sign vector;
/// bit i of the index set means sigma_i = +1.
class SignProfileTable {
public:
  explicit SignProfileTable(std::span<const FiniteModel> xs) {
    if (xs.empty() || xs.size() > 16) throw ConfigError("sign profile tables support 1 to 16 variables");
    for (const auto& x : xs) coords_.push_back(coupled_means(x));
    const std::size_t n = coords_.size();
    means_.assign(std::size_t{1} << n, 0.0);
    for (std::size_t s = 0; s < means_.size(); ++s) {
      double total = 0.0;
      for (std::size_t i = 0; i < n; ++i) total += (s >> i & 1U) ? coords_[i].plus : coords_[i].minus;
      means_[s] = total;
    }
  }

  std::size_t size() const noexcept { return coords_.size(); }
  const std::vector<double>& means() const noexcept { return means_; }
  double at(std::uint32_t sigma) const { return means_.at(sigma); }
  const CoupledMeans& coordinate(std::size_t i) const { return coords_.at(i); }

  /// Smallest E(sigma) - E(sigma') over sigma > sigma' differing in one
  /// coordinate; every comparable pair is a sum of such steps.
  double min_step_gap() const {
    double gap = std::numeric_limits<double>::infinity();
    for (const auto& c : coords_) gap = std::min(gap, c.plus - c.minus);
    return gap;
  }

private:
  std::vector<CoupledMeans> coords_;
  std::vector<double> means_;
};

// ---------------------------------------------------------------------------
// Interval counts.

inline std::uint64_t central_binomial(std::size_t n) {
  std::uint64_t c = 1;
  const std::size_t k = n / 2;
  for (std::size_t i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

struct IntervalCount {
  std::uint64_t count = 0;
  std::uint64_t bound = 0;  ///< C(n, floor(n/2))
  bool ok() const { return count <= bound; }
};

namespace detail {

inline IntervalCount count_in(std::span<const double> sums, std::size_t n, double a) {
  IntervalCount r;
  r.bound = central_binomial(n);
  for (double s : sums)
    if (s > a && s <= a + 2.0) ++r.count;
  return r;
}

}  // namespace detail

/// Number of sign vectors with sum_i sigma_i x_i in (a, a + 2]; requires x_i >= 1.
inline IntervalCount interval_count_check(std::span<const double> xs, double a) {
  if (xs.empty() || xs.size() > 20) throw ConfigError("interval counts need 1 to 20 values");
  for (double x : xs)
    if (!(x >= 1.0)) throw ConfigError("interval counts need every |x_i| >= 1");
  const std::size_t n = xs.size();
  std::vector<double> sums(std::size_t{1} << n);
  for (std::size_t s = 0; s < sums.size(); ++s) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += (s >> i & 1U) ? xs[i] : -xs[i];
    sums[s] = total;
  }
  return detail::count_in(sums, n, a);
}

/// Number of sign vectors with E(sigma) in (a, a + 2].
inline IntervalCount interval_count_check(const SignProfileTable& t, double a) {
  return detail::count_in(t.means(), t.size(), a);
}

// ---------------------------------------------------------------------------
// Lower bounds on positive parts of sums.

struct InequalityCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double std_error = 0.0;  ///< 0 for exact evaluations
  bool exact = false;
  bool skipped = false;
  std::string note;
  std::uint64_t samples = 0;

  bool ok() const {
    if (skipped) return true;
    if (exact) return lhs >= rhs - 1e-9 * (1.0 + std::abs(rhs));
    return lhs >= rhs - 3.0 * std_error;
  }
};

struct PositivePartReport {
  InequalityCheck mdm_sum;        ///< MDM(sum) >= sqrt(n)/12 when every MDM(X_i) >= 1
  InequalityCheck mean_zero;      ///< E[(sum)^+] >= sum z_i / (48 sqrt n), all means 0
  InequalityCheck positive_mean;  ///< E[(sum)^+] >= sum z_i / (96 sqrt n), all means > 0
  bool ok() const { return mdm_sum.ok() && mean_zero.ok() && positive_mean.ok(); }
};

/// Largest merged support an exact convolution may reach.
constexpr std::size_t kMaxConvolutionSupport = 1'000'000;

/// Exact law of X_1 + ... + X_n, or nothing if the support would grow too large.
inline std::optional<FiniteModel> exact_sum(std::span<const RandomVariableModel> ys) {
  std::map<double, double> law{{0.0, 1.0}};
  for (const auto& y : ys) {
    const auto* f = std::get_if<FiniteModel>(&y);
    if (!f) return std::nullopt;
    std::map<double, double> next;
    for (const auto& [v, p] : law)
      for (const auto& a : f->atoms()) next[v + a.value] += p * a.prob;
    if (next.size() > kMaxConvolutionSupport) return std::nullopt;
    law = std::move(next);
  }
  std::vector<Atom> atoms;
  atoms.reserve(law.size());
  for (const auto& [v, p] : law) atoms.push_back({v, p});
  return FiniteModel::from_weights(std::move(atoms));
}

namespace detail {

struct SumMoments {
  Moments positive;
  std::vector<double> sums;
  void merge(const SumMoments& o) {
    positive.merge(o.positive);
    sums.insert(sums.end(), o.sums.begin(), o.sums.end());
  }
};

inline double draw(const RandomVariableModel& y, double u) {
  if (auto f = std::get_if<FiniteModel>(&y)) return f->sample_at(u);
  const auto& a = std::get<AnalyticModel>(y);
  return a.shift + a.scale * a.dist.sample_at(u);
}

}  // namespace detail

/// Checks the three positive-part lower bounds for Y_1..Y_n. Finite models
/// with a small enough convolution are evaluated exactly, anything else by
/// Monte Carlo. A bound whose hypothesis fails is reported as skipped.
inline PositivePartReport positive_part_bound_check(std::span<const RandomVariableModel> ys_in,
                                                    std::uint64_t n_samples, std::uint64_t seed) {
  if (ys_in.empty()) throw ConfigError("need at least one variable");
  std::vector<RandomVariableModel> ys;
  for (const auto& y : ys_in) ys.push_back(detail::normalize(y));
  const double n = static_cast<double>(ys.size());
  const double root_n = std::sqrt(n);

  bool mdm_at_least_one = true;
  bool all_zero = true;
  bool all_positive = true;
  double z_sum = 0.0;
  for (const auto& y : ys) {
    const double mu = model_mean(y);
    mdm_at_least_one = mdm_at_least_one && median_md_mdm(y).mdm >= 1.0 - 1e-9;
    all_zero = all_zero && std::abs(mu) <= 1e-9;
    all_positive = all_positive && mu > 1e-9;
    z_sum += positive_part_mean(y);
  }

  PositivePartReport r;
  r.mdm_sum.name = "mdm_of_sum";
  r.mean_zero.name = "mean_zero_positive_part";
  r.positive_mean.name = "positive_mean_positive_part";
  r.mdm_sum.rhs = root_n / 12.0;
  r.mean_zero.rhs = z_sum / (48.0 * root_n);
  r.positive_mean.rhs = z_sum / (96.0 * root_n);

  double mdm = 0.0;
  double mdm_se = 0.0;
  double pos = 0.0;
  double pos_se = 0.0;
  bool exact = false;
  std::uint64_t used = 0;
  if (auto law = exact_sum(ys)) {
    exact = true;
    mdm = median_md_mdm(*law).mdm;
    pos = positive_part_mean(*law);
  } else {
    if (n_samples < 2) throw std::invalid_argument("Monte Carlo path needs samples");
    used = n_samples;
    auto acc = reduce_chunks<detail::SumMoments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
      detail::SumMoments part;
      part.sums.reserve(e - b);
      for (std::uint64_t k = b; k < e; ++k) {
        const SampleStream stream(seed, k);
        double s = 0.0;
        for (std::size_t i = 0; i < ys.size(); ++i) s += detail::draw(ys[i], stream.uniform(i));
        part.positive.add(std::max(0.0, s));
        part.sums.push_back(s);
      }
      return part;
    });
    pos = acc.positive.mean();
    pos_se = acc.positive.std_error();
    // the sample median's error enters E|S - m| only to second order
    auto& sums = acc.sums;
    const auto mid = sums.begin() + static_cast<std::ptrdiff_t>((sums.size() - 1) / 2);
    std::nth_element(sums.begin(), mid, sums.end());
    const double m = *mid;
    Moments dev;
    for (double s : sums) dev.add(std::abs(s - m));
    mdm = dev.mean();
    mdm_se = dev.std_error();
  }

  auto fill = [&](InequalityCheck& c, double lhs, double se, bool hypothesis, const char* why) {
    c.lhs = lhs;
    c.std_error = se;
    c.exact = exact;
    c.samples = used;
    c.skipped = !hypothesis;
    if (!hypothesis) c.note = why;
  };
  fill(r.mdm_sum, mdm, mdm_se, mdm_at_least_one, "some MDM(X_i) < 1");
  fill(r.mean_zero, pos, pos_se, all_zero, "some mean is not zero");
  fill(r.positive_mean, pos, pos_se, all_positive, "some mean is not positive");
  return r;
}

}  // namespace revwel
