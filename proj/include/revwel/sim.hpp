#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "revwel/classify.hpp"
#include "revwel/dist.hpp"
#include "revwel/env.hpp"
#include "revwel/errors.hpp"
#include "revwel/mech.hpp"
#include "revwel/parallel.hpp"
#include "revwel/quadrature.hpp"
#include "revwel/rng.hpp"
#include "revwel/stats.hpp"

namespace revwel {

constexpr std::uint64_t kMinSamples = 1000;

/// Limit of ratio * sqrt(n) for the uniform public project.
inline double public_project_limit() { return std::sqrt(2.0 / (3.0 * std::numbers::pi)); }

struct RatioReport {
  std::string mechanism;
  std::size_t n = 0;
  double c = 0.0;
  EstimateWithCI revenue;
  EstimateWithCI welfare;
  double ratio = 0.0;
  double ratio_se = 0.0;
  double bound = 0.0;
  bool bound_satisfied = true;
  std::string hypothesis;  ///< which revenue-to-welfare guarantee the bound comes from
  bool hypothesis_met = true;

  /// ratio >= bound - 3 standard errors.
  void apply_bound(double b) {
    bound = b;
    bound_satisfied = ratio >= bound - 3.0 * ratio_se;
  }
};

/// Values of one Monte Carlo sample: v_i is agent i's quantile draw from the
/// counter stream (seed, agent i, sample k).
inline void draw_profile(const Market& m, std::uint64_t seed, std::uint64_t k, std::span<double> v) {
  const SampleStream stream(seed, k);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = m.dist(i).sample_at(stream.uniform(i));
}

namespace detail {

inline void require_samples(std::uint64_t n) {
  if (n < kMinSamples) throw std::invalid_argument("at least 1000 samples are required");
}

inline void require_finite_means(const Market& m) {
  for (std::size_t i = 0; i < m.size(); ++i)
    if (!m.dist(i).has_finite_mean())
      throw InfiniteMean("revenue-to-welfare ratio is undefined for an infinite-mean value distribution");
}

inline double sample_revenue(const Market& m, MechanismId id, std::span<const double> v) {
  if (id == MechanismId::Optimal) return optimal_outcome(m, v).virtual_revenue;
  return outcome(m, id, v).revenue();
}

inline RatioReport finish(const PairMoments& acc, std::string mechanism, std::size_t n, std::uint64_t seed) {
  RatioReport r;
  r.mechanism = std::move(mechanism);
  r.n = n;
  r.revenue = acc.num.estimate(seed);
  r.welfare = acc.den.estimate(seed);
  r.ratio = acc.ratio();
  r.ratio_se = acc.ratio_std_error();
  return r;
}

}  // namespace detail

/// Expected revenue of `id` and expected welfare of the efficient allocation
/// over common random value profiles. Revenue of the optimal mechanism is
/// its ironed virtual surplus; the others are charged explicit payments.
inline RatioReport estimate_revenue_welfare(const Market& m, MechanismId id, std::uint64_t n_samples,
                                            std::uint64_t seed) {
  detail::require_samples(n_samples);
  detail::require_finite_means(m);
  const auto acc = reduce_chunks<PairMoments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
    PairMoments part;
    std::vector<double> v(m.size());
    for (std::uint64_t k = b; k < e; ++k) {
      draw_profile(m, seed, k, v);
      const double welfare = m.env().max_weight_set(v).weight;
      part.add(detail::sample_revenue(m, id, v), welfare);
    }
    return part;
  });
  return detail::finish(acc, std::string(to_string(id)), m.size(), seed);
}

/// Mean of (threshold payments - ironed virtual surplus) per profile of the
/// optimal mechanism. Zero in expectation when payments are truthful.
inline Moments myerson_identity_gap(const Market& m, std::uint64_t n_samples, std::uint64_t seed) {
  detail::require_samples(n_samples);
  detail::require_finite_means(m);
  return reduce_chunks<Moments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
    Moments part;
    std::vector<double> v(m.size());
    for (std::uint64_t k = b; k < e; ++k) {
      draw_profile(m, seed, k, v);
      double paid = 0.0;
      for (double p : payment_audit(m, MechanismId::Optimal, v)) paid += p;
      part.add(paid - optimal_outcome(m, v).virtual_revenue);
    }
    return part;
  });
}

// ---------------------------------------------------------------------------
// Public project: serve everyone iff the ironed virtual values sum to >= 0.

namespace detail {

template <class ValuePhi>
PairMoments public_project_kernel(std::size_t n, std::uint64_t seed, std::uint64_t b, std::uint64_t e,
                                  ValuePhi&& value_phi) {
  PairMoments part;
  for (std::uint64_t k = b; k < e; ++k) {
    const SampleStream stream(seed, k);
    double phi_sum = 0.0;
    double v_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto [v, phi] = value_phi(stream.uniform(i));
      v_sum += v;
      phi_sum += phi;
    }
    part.add(phi_sum >= 0.0 ? phi_sum : 0.0, v_sum);
  }
  return part;
}

struct ValuePhi {
  double value;
  double phi;
};

}  // namespace detail

/// Optimal-mechanism revenue and welfare for a public project of n i.i.d.
/// agents, without enumerating the environment.
inline RatioReport public_project_ratio(const Distribution& d, std::size_t n, std::uint64_t n_samples,
                                        std::uint64_t seed) {
  detail::require_samples(n_samples);
  if (!d.has_finite_mean()) throw InfiniteMean("public project ratio needs a finite mean");
  const auto acc = std::visit(
      [&](const auto& k) -> PairMoments {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, Uniform>) {
          const double width = k.hi - k.lo;
          return reduce_chunks<PairMoments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
            return detail::public_project_kernel(n, seed, b, e, [&](double u) {
              const double v = k.hi - std::max(1.0 - u, kTailTruncation) * width;
              return detail::ValuePhi{v, 2.0 * v - k.hi};
            });
          });
        } else if constexpr (std::is_same_v<K, Exponential>) {
          return reduce_chunks<PairMoments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
            return detail::public_project_kernel(n, seed, b, e, [&](double u) {
              const double v = -std::log(std::max(1.0 - u, kTailTruncation)) / k.rate;
              return detail::ValuePhi{v, v - 1.0 / k.rate};
            });
          });
        } else {
          const VirtualValueCurve curve(d);
          return reduce_chunks<PairMoments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
            return detail::public_project_kernel(n, seed, b, e, [&](double u) {
              const double v = d.sample_at(u);
              return detail::ValuePhi{v, curve.ironed_value(v)};
            });
          });
        }
      },
      d.kind());
  return detail::finish(acc, "optimal", n, seed);
}

struct AsymptoticRow {
  std::size_t n;
  RatioReport report;
  double ratio_sqrt_n;
};

/// ratio * sqrt(n) for the uniform [0,1] public project at each n.
inline std::vector<AsymptoticRow> public_project_asymptotics(std::span<const std::size_t> n_list,
                                                             std::uint64_t n_samples, std::uint64_t seed) {
  const auto d = Distribution::uniform(0.0, 1.0);
  std::vector<AsymptoticRow> rows;
  for (std::size_t n : n_list) {
    if (n == 0 || n > 1'000'000) throw std::invalid_argument("public project size must be in [1, 1e6]");
    auto rep = public_project_ratio(d, n, n_samples, seed);
    const double scaled = rep.ratio * std::sqrt(static_cast<double>(n));
    rows.push_back({n, std::move(rep), scaled});
  }
  return rows;
}

/// Revenue and welfare by quadrature for public projects of one or two agents.
struct ExactRatio {
  double revenue;
  double welfare;
  double ratio;
};

inline ExactRatio public_project_exact(const Market& m) {
  if (!m.env().is<PublicProject>()) throw std::invalid_argument("exact route needs a public project");
  if (m.size() == 0 || m.size() > 2) throw std::invalid_argument("exact route supports one or two agents");
  detail::require_finite_means(m);

  // Survival level at which agent i's ironed virtual value reaches `target`
  // (ironed phi composed with the upper quantile is non-increasing in s).
  auto crossing = [&](std::size_t i, double target) {
    auto phi_at = [&](double s) { return m.ironed(i, m.dist(i).upper_quantile(s)); };
    double lo = 0.0;
    double hi = 1.0;
    if (phi_at(1.0) >= target) return 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-16; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi_at(mid) >= target ? lo : hi) = mid;
    }
    return lo;
  };

  double welfare = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) welfare += m.dist(i).mean();

  double revenue = 0.0;
  const auto& d0 = m.dist(0);
  if (m.size() == 1) {
    const double cut = crossing(0, 0.0);
    revenue = d0.expect([&](double x) { return std::max(0.0, m.ironed(0, x)); }, std::span(&cut, 1));
  } else {
    const auto& d1 = m.dist(1);
    auto inner = [&](double x0) {
      const double a = m.ironed(0, x0);
      const double cut = crossing(1, -a);
      return d1.expect([&](double x1) { return std::max(0.0, a + m.ironed(1, x1)); }, std::span(&cut, 1));
    };
    revenue = d0.expect(inner);
  }
  return {revenue, welfare, revenue / welfare};
}

// ---------------------------------------------------------------------------
// Single-item auction with n i.i.d. counterexample bidders.

/// Upper bound e/(e-1) * 2 / (ln(n / ln^2 n) + 2) on the ratio; NaN for n < 2.
inline double counterexample_upper_bound(std::size_t n) {
  if (n < 2) return std::nan("");
  const double nd = static_cast<double>(n);
  const double l = std::log(nd);
  const double e = std::numbers::e;
  return e / (e - 1.0) * 2.0 / (std::log(nd / (l * l)) + 2.0);
}

struct CounterexampleRow {
  std::size_t n = 0;
  RatioReport report;  ///< Monte Carlo; bound = upper bound, satisfied iff ratio <= bound + 3 SE
  ExactRatio exact{};  ///< quadrature
};

/// E[phi(X*)^+] and E[X*] for X* the maximum of n counterexample draws, by
/// quadrature in y = ln(X* + delta).
inline ExactRatio counterexample_exact(std::size_t n) {
  if (n == 0) throw std::invalid_argument("need at least one bidder");
  const auto d = Distribution::counterexample();
  const double delta = counterexample_delta();
  const double nd = static_cast<double>(n);
  // e^y Pr(X* > e^y - delta)
  auto tail = [nd](double y) {
    if (y > 600.0) return nd / (y * y);
    const double s = std::exp(-y) / (y * y);
    return std::exp(y) * -std::expm1(nd * std::log1p(-s));
  };
  auto over = [](auto&& g, double y0) {
    constexpr double y_split = 60.0;
    const double body = quad::integrate(g, y0, y_split);
    auto far = [&](double w) { return w <= 0.0 ? 0.0 : g(1.0 / w) / (w * w); };
    return body + quad::integrate(far, 0.0, 1.0 / y_split);
  };
  const double welfare = over(tail, std::log(delta));
  const double reserve = VirtualValueCurve(d).monopoly_price();
  const double revenue = over([&](double y) { return 2.0 * (y + 1.0) / ((y + 2.0) * (y + 2.0)) * tail(y); },
                              std::log(reserve + delta));
  return {revenue, welfare, revenue / welfare};
}

/// Monte Carlo over X* = upper_quantile(1 - U^{1/n}) with one uniform per
/// sample shared across n (common random numbers), plus the quadrature route.
inline std::vector<CounterexampleRow> counterexample_curve(std::span<const std::size_t> n_list,
                                                           std::uint64_t n_samples, std::uint64_t seed) {
  detail::require_samples(n_samples);
  const auto d = Distribution::counterexample();
  std::vector<CounterexampleRow> rows;
  for (std::size_t n : n_list) {
    if (n == 0) throw std::invalid_argument("need at least one bidder");
    const double nd = static_cast<double>(n);
    const auto acc = reduce_chunks<PairMoments>(n_samples, [&](std::uint64_t b, std::uint64_t e) {
      PairMoments part;
      for (std::uint64_t k = b; k < e; ++k) {
        const double u = uniform_at(seed, 0, k);
        const double s = std::max(-std::expm1(std::log(u) / nd), kTailTruncation);
        const double x = d.upper_quantile(s);
        part.add(std::max(0.0, d.virtual_value(x)), x);
      }
      return part;
    });
    CounterexampleRow row;
    row.n = n;
    row.report = detail::finish(acc, "optimal", n, seed);
    row.report.hypothesis = "counterexample_upper_bound";
    row.report.bound = counterexample_upper_bound(n);
    row.report.bound_satisfied =
        std::isnan(row.report.bound) || row.report.ratio <= row.report.bound + 3.0 * row.report.ratio_se;
    row.exact = counterexample_exact(n);
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Bound audits.

/// Which guarantee applies to (environment, distributions, c, mechanism), and its bound.
struct BoundChoice {
  std::string hypothesis;
  double bound = 0.0;
  bool met = false;
};

inline BoundChoice choose_bound(const Market& m, double c, MechanismId id) {
  bool all_c = true;
  bool all_strong = true;
  bool all_hyper = true;
  for (std::size_t i = 0; i < m.size(); ++i) {
    bool cached = false;
    for (std::size_t j = 0; j < i && !cached; ++j) cached = &m.curve(j) == &m.curve(i);
    if (cached) continue;
    const auto rep = classify(m.dist(i), c);
    all_c = all_c && rep.c_bounded;
    all_strong = all_strong && rep.strongly_c_bounded;
    all_hyper = all_hyper && rep.hyper_regular;
  }
  const double root_n = std::sqrt(static_cast<double>(std::max<std::size_t>(m.size(), 1)));
  if (id != MechanismId::Efficient && m.env().is_downward_closed() && all_hyper && all_c)
    return {"downward_closed_hyper_regular", 1.0 / c, true};
  if (id == MechanismId::Optimal && m.env().is<PublicProject>() && all_c)
    return {"public_project_c_bounded", 1.0 / (96.0 * c * root_n), true};
  if (id == MechanismId::Optimal && all_strong)
    return {"strongly_c_bounded", 1.0 / (96.0 * c * root_n), true};
  return {"none", 0.0, false};
}

/// Estimates the ratio and checks it against the applicable lower bound.
/// Unmet hypotheses are reported (hypothesis = "none"), not raised.
inline RatioReport bound_audit(const Market& m, double c, std::uint64_t n_samples, std::uint64_t seed,
                               MechanismId id = MechanismId::Optimal) {
  if (!(c > 0.0)) throw std::invalid_argument("c must be positive");
  const auto choice = choose_bound(m, c, id);
  auto rep = estimate_revenue_welfare(m, id, n_samples, seed);
  rep.c = c;
  rep.hypothesis = choice.hypothesis;
  rep.hypothesis_met = choice.met;
  rep.apply_bound(choice.bound);
  return rep;
}

}  // namespace revwel
