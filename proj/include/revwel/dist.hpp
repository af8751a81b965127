#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "revwel/errors.hpp"
#include "revwel/quadrature.hpp"
#include "revwel/rng.hpp"

namespace revwel {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Survival level at which unbounded upper tails are truncated for sampling.
constexpr double kTailTruncation = 1e-9;

namespace detail {

inline double solve_counterexample_delta() {
  // delta * ln(delta)^2 = 1 on [1.5, 2.5]
  double lo = 1.5;
  double hi = 2.5;
  auto g = [](double d) { return d * std::log(d) * std::log(d) - 1.0; };
  while (hi - lo > 1e-15) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// The shift delta of the regular-but-not-hyper-regular counterexample.
inline double counterexample_delta() {
  static const double delta = detail::solve_counterexample_delta();
  return delta;
}

// Distribution kinds.

struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

struct Exponential {
  double rate = 1.0;
};

/// F(x) = 1 - (scale / x)^alpha on [scale, inf).
struct Pareto {
  double alpha = 2.0;
  double scale = 1.0;
};

/// F(x) = 1 - 1/x on [1, inf).
struct EqualRevenue {};

/// Value t >= 0 with 1 - F(t) = 1 / (x ln^2 x), x = t + delta.
struct CounterExample {};

/// Point masses 1/N on each sample value.
struct Empirical {
  std::vector<double> sorted;
};

/// One-dimensional private-value distribution on [0, inf).
///
/// Immutable after construction. All quantities are exposed both in value
/// space (cdf, survival) and in survival space (`upper_quantile(s)` is the
/// value whose upper-tail mass is s), which keeps the far tails of heavy
/// distributions accurate where 1 - q would round to zero.
class Distribution {
public:
  using Kind = std::variant<Uniform, Exponential, Pareto, EqualRevenue, CounterExample, Empirical>;

  Distribution() : Distribution(Uniform{}) {}

  explicit Distribution(Kind kind) : kind_(std::move(kind)) {
    validate();
    mean_ = compute_mean();
  }

  static Distribution uniform(double lo, double hi) { return Distribution(Uniform{lo, hi}); }
  static Distribution exponential(double rate) { return Distribution(Exponential{rate}); }
  static Distribution pareto(double alpha, double scale) { return Distribution(Pareto{alpha, scale}); }
  static Distribution equal_revenue() { return Distribution(EqualRevenue{}); }
  static Distribution counterexample() { return Distribution(CounterExample{}); }
  static Distribution empirical(std::vector<double> samples) {
    std::sort(samples.begin(), samples.end());
    return Distribution(Empirical{std::move(samples)});
  }

  const Kind& kind() const noexcept { return kind_; }

  template <class K>
  bool is() const noexcept {
    return std::holds_alternative<K>(kind_);
  }

  std::string_view name() const noexcept {
    return std::visit(
        [](const auto& k) -> std::string_view {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) return "uniform";
          else if constexpr (std::is_same_v<K, Exponential>) return "exponential";
          else if constexpr (std::is_same_v<K, Pareto>) return "pareto";
          else if constexpr (std::is_same_v<K, EqualRevenue>) return "equal_revenue";
          else if constexpr (std::is_same_v<K, CounterExample>) return "counterexample";
          else return "empirical";
        },
        kind_);
  }

  double support_lo() const noexcept {
    return std::visit(
        [](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) return k.lo;
          else if constexpr (std::is_same_v<K, Pareto>) return k.scale;
          else if constexpr (std::is_same_v<K, EqualRevenue>) return 1.0;
          else if constexpr (std::is_same_v<K, Empirical>) return k.sorted.front();
          else return 0.0;
        },
        kind_);
  }

  double support_hi() const noexcept {
    if (auto u = std::get_if<Uniform>(&kind_)) return u->hi;
    if (auto e = std::get_if<Empirical>(&kind_)) return e->sorted.back();
    return kInf;
  }

  bool has_density() const noexcept { return !is<Empirical>(); }

  bool has_finite_mean() const noexcept { return std::isfinite(mean_); }

  /// E[X]; +inf when the tail integral diverges.
  double mean() const noexcept { return mean_; }

  /// Pr(X > x).
  double survival(double x) const noexcept {
    return std::visit(
        [x](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            if (x <= k.lo) return 1.0;
            if (x >= k.hi) return 0.0;
            return (k.hi - x) / (k.hi - k.lo);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return x <= 0.0 ? 1.0 : std::exp(-k.rate * x);
          } else if constexpr (std::is_same_v<K, Pareto>) {
            return x <= k.scale ? 1.0 : std::pow(k.scale / x, k.alpha);
          } else if constexpr (std::is_same_v<K, EqualRevenue>) {
            return x <= 1.0 ? 1.0 : 1.0 / x;
          } else if constexpr (std::is_same_v<K, CounterExample>) {
            if (x <= 0.0) return 1.0;
            const double z = x + counterexample_delta();
            const double l = std::log(z);
            return 1.0 / (z * l * l);
          } else {
            const auto& s = k.sorted;
            const auto above = s.end() - std::upper_bound(s.begin(), s.end(), x);
            return static_cast<double>(above) / static_cast<double>(s.size());
          }
        },
        kind_);
  }

  /// F(x) = Pr(X <= x).
  double cdf(double x) const noexcept { return 1.0 - survival(x); }

  /// Density; zero outside the support. Empirical distributions have none.
  double pdf(double x) const {
    return std::visit(
        [x](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            return (x < k.lo || x > k.hi) ? 0.0 : 1.0 / (k.hi - k.lo);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return x < 0.0 ? 0.0 : k.rate * std::exp(-k.rate * x);
          } else if constexpr (std::is_same_v<K, Pareto>) {
            return x < k.scale ? 0.0 : k.alpha * std::pow(k.scale / x, k.alpha) / x;
          } else if constexpr (std::is_same_v<K, EqualRevenue>) {
            return x < 1.0 ? 0.0 : 1.0 / (x * x);
          } else if constexpr (std::is_same_v<K, CounterExample>) {
            if (x < 0.0) return 0.0;
            const double z = x + counterexample_delta();
            const double l = std::log(z);
            return (l + 2.0) / (z * z * l * l * l);
          } else {
            throw UndefinedDensity("empirical distribution has no density");
          }
        },
        kind_);
  }

  /// Hazard rate f / (1 - F).
  double hazard(double x) const {
    const double s = survival(x);
    if (s <= 0.0) return kInf;
    return pdf(x) / s;
  }

  /// Value whose upper-tail mass is s: the smallest x with Pr(X > x) <= s.
  /// s = 0 gives support_hi, s = 1 gives support_lo.
  double upper_quantile(double s) const {
    if (!(s >= 0.0 && s <= 1.0)) throw std::domain_error("survival level outside [0,1]");
    return std::visit(
        [s](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            return k.hi - s * (k.hi - k.lo);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return s <= 0.0 ? kInf : -std::log(s) / k.rate;
          } else if constexpr (std::is_same_v<K, Pareto>) {
            return s <= 0.0 ? kInf : k.scale * std::pow(s, -1.0 / k.alpha);
          } else if constexpr (std::is_same_v<K, EqualRevenue>) {
            return s <= 0.0 ? kInf : 1.0 / s;
          } else if constexpr (std::is_same_v<K, CounterExample>) {
            return s <= 0.0 ? kInf : counterexample_upper_quantile(s);
          } else {
            const auto& v = k.sorted;
            const double n = static_cast<double>(v.size());
            // smallest index i with (n - 1 - i) / n <= s
            const double idx = std::ceil(n - 1.0 - s * n - 1e-9);
            const auto i = static_cast<std::size_t>(std::clamp(idx, 0.0, n - 1.0));
            return v[i];
          }
        },
        kind_);
  }

  /// log(upper_quantile(exp(log_s))), valid far below the smallest double.
  double log_upper_quantile(double log_s) const {
    if (log_s > -700.0) return std::log(upper_quantile(std::exp(log_s)));
    return std::visit(
        [this, log_s](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Exponential>) {
            return std::log(-log_s / k.rate);
          } else if constexpr (std::is_same_v<K, Pareto>) {
            return std::log(k.scale) - log_s / k.alpha;
          } else if constexpr (std::is_same_v<K, EqualRevenue>) {
            return -log_s;
          } else if constexpr (std::is_same_v<K, CounterExample>) {
            const double y = counterexample_log_shifted(-log_s);
            return y + std::log1p(-counterexample_delta() * std::exp(-y));
          } else {
            return std::log(support_hi());
          }
        },
        kind_);
  }

  /// Smallest x with F(x) >= q, for q in [0, 1).
  double quantile(double q) const {
    if (!(q >= 0.0 && q < 1.0)) throw std::invalid_argument("quantile level outside [0,1)");
    return std::visit(
        [this, q](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            return k.lo + q * (k.hi - k.lo);
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return -std::log1p(-q) / k.rate;
          } else if constexpr (std::is_same_v<K, Pareto>) {
            return k.scale * std::exp(-std::log1p(-q) / k.alpha);
          } else if constexpr (std::is_same_v<K, EqualRevenue>) {
            return 1.0 / (1.0 - q);
          } else if constexpr (std::is_same_v<K, Empirical>) {
            const auto& v = k.sorted;
            const double n = static_cast<double>(v.size());
            const double idx = std::ceil(q * n - 1e-9) - 1.0;
            return v[static_cast<std::size_t>(std::clamp(idx, 0.0, n - 1.0))];
          } else {
            return upper_quantile(1.0 - q);
          }
        },
        kind_);
  }

  /// phi(x) = x - (1 - F(x)) / f(x).
  double virtual_value(double x) const {
    if (!has_density()) throw UndefinedDensity("virtual value needs a density");
    if (!(x >= support_lo() && x <= support_hi()))
      throw UndefinedDensity("virtual value requested outside the support");
    return std::visit(
        [this, x](const auto& k) -> double {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            return 2.0 * x - k.hi;
          } else if constexpr (std::is_same_v<K, Exponential>) {
            return x - 1.0 / k.rate;
          } else if constexpr (std::is_same_v<K, Pareto>) {
            return x * (1.0 - 1.0 / k.alpha);
          } else if constexpr (std::is_same_v<K, EqualRevenue>) {
            return 0.0;
          } else if constexpr (std::is_same_v<K, CounterExample>) {
            const double z = x + counterexample_delta();
            return -counterexample_delta() + 2.0 * z / (std::log(z) + 2.0);
          } else {
            const double f = pdf(x);
            if (f <= 0.0) throw UndefinedDensity("zero density");
            return x - survival(x) / f;
          }
        },
        kind_);
  }

  /// Quantile-transform draw from any 64-bit engine.
  template <class Engine>
  double sample(Engine& engine) const {
    return quantile(to_unit(engine()));
  }

  /// Draw from a uniform level u in (0,1), truncating unbounded upper tails
  /// at survival kTailTruncation.
  double sample_at(double u) const {
    return upper_quantile(std::clamp(1.0 - u, kTailTruncation, 1.0));
  }

  /// \int_0^1 g(upper_quantile(s)) ds, i.e. E[g(X)], split at the survival
  /// levels in `breaks`.
  template <class G>
  double expect(G&& g, std::span<const double> breaks = {}) const {
    if (auto e = std::get_if<Empirical>(&kind_)) {
      double total = 0.0;
      for (double v : e->sorted) total += g(v);
      return total / static_cast<double>(e->sorted.size());
    }
    auto integrand = [&](double s) { return g(upper_quantile(s)); };
    if (std::isfinite(support_hi())) return quad::integrate_pieces(integrand, 0.0, 1.0, breaks);
    return quad::integrate_unit(integrand, breaks);
  }

private:
  // y = ln(t + delta) solving y + 2 ln y = target, target = -ln s >= 0.
  static double counterexample_log_shifted(double target) {
    const double lo = std::log(counterexample_delta());
    if (target <= 0.0) return lo;
    auto g = [target](double y) { return y + 2.0 * std::log(y) - target; };
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        g, lo, target + 2.0, boost::math::tools::eps_tolerance<double>(52), iters);
    if (iters >= 200) throw NumericFailure("counterexample quantile did not converge");
    return 0.5 * (a + b);
  }

  static double counterexample_upper_quantile(double s) {
    const double delta = counterexample_delta();
    const double y = counterexample_log_shifted(-std::log(s));
    return delta * std::expm1(y - std::log(delta));
  }

  void validate() const {
    std::visit(
        [](const auto& k) {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, Uniform>) {
            if (!(k.lo >= 0.0 && k.hi > k.lo && std::isfinite(k.hi)))
              throw ConfigError("uniform needs 0 <= lo < hi < inf");
          } else if constexpr (std::is_same_v<K, Exponential>) {
            if (!(k.rate > 0.0 && std::isfinite(k.rate))) throw ConfigError("exponential needs rate > 0");
          } else if constexpr (std::is_same_v<K, Pareto>) {
            if (!(k.alpha > 0.0 && k.scale > 0.0 && std::isfinite(k.alpha) && std::isfinite(k.scale)))
              throw ConfigError("pareto needs alpha > 0 and scale > 0");
          } else if constexpr (std::is_same_v<K, Empirical>) {
            if (k.sorted.empty()) throw ConfigError("empirical distribution needs samples");
            for (double v : k.sorted)
              if (!(v >= 0.0 && std::isfinite(v))) throw ConfigError("empirical samples must be finite and >= 0");
            if (!std::is_sorted(k.sorted.begin(), k.sorted.end()))
              throw ConfigError("empirical samples must be sorted");
          }
        },
        kind_);
  }

  double compute_mean() const {
    if (is<EqualRevenue>()) return kInf;
    if (auto p = std::get_if<Pareto>(&kind_); p && p->alpha <= 1.0) return kInf;
    if (std::isfinite(support_hi())) return expect([](double x) { return x; });
    // \int_0^1 Q(s) ds; the tail s < s0 is integrated in w = -1/ln s with
    // Q(s) s evaluated in log space so that slowly decaying tails keep their mass
    constexpr double s0 = 1e-3;
    const double body = quad::integrate([this](double s) { return upper_quantile(s); }, s0, 1.0);
    auto tail = [this](double w) {
      if (w <= 0.0) return 0.0;
      const double log_s = -1.0 / w;
      return std::exp(log_upper_quantile(log_s) + log_s) / (w * w);
    };
    return body + quad::integrate(tail, 0.0, -1.0 / std::log(s0));
  }

  Kind kind_;
  double mean_ = 0.0;
};

}  // namespace revwel
