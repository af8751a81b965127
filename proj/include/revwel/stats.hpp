#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace revwel {

/// Two-sided 99% normal quantile.
constexpr double kZ99 = 2.5758293035489004;

struct EstimateWithCI {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t seed = 0;

  static EstimateWithCI from(double mean, double se, std::uint64_t n, std::uint64_t seed) {
    return {mean, se, mean - kZ99 * se, mean + kZ99 * se, n, seed};
  }

  /// An exactly computed value (quadrature or enumeration).
  static EstimateWithCI exact(double v) { return {v, 0.0, v, v, 0, 0}; }
};

/// Running first and second moments of one variable.
struct Moments {
  double count = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;

  void add(double x) noexcept {
    count += 1.0;
    sum += x;
    sum_sq += x * x;
  }

  void merge(const Moments& o) noexcept {
    count += o.count;
    sum += o.sum;
    sum_sq += o.sum_sq;
  }

  double mean() const noexcept { return count > 0.0 ? sum / count : 0.0; }

  double variance() const noexcept {
    if (count < 2.0) return 0.0;
    const double m = mean();
    return std::max(0.0, (sum_sq - count * m * m) / (count - 1.0));
  }

  double std_error() const noexcept { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }

  EstimateWithCI estimate(std::uint64_t seed) const {
    return EstimateWithCI::from(mean(), std_error(), static_cast<std::uint64_t>(count), seed);
  }
};

/// Joint moments of (numerator, denominator) pairs for ratio estimation.
struct PairMoments {
  Moments num;
  Moments den;
  double sum_cross = 0.0;

  void add(double a, double b) noexcept {
    num.add(a);
    den.add(b);
    sum_cross += a * b;
  }

  void merge(const PairMoments& o) noexcept {
    num.merge(o.num);
    den.merge(o.den);
    sum_cross += o.sum_cross;
  }

  double covariance() const noexcept {
    const double n = num.count;
    if (n < 2.0) return 0.0;
    return (sum_cross - n * num.mean() * den.mean()) / (n - 1.0);
  }

  double ratio() const noexcept { return num.mean() / den.mean(); }

  /// Delta-method standard error of mean(num) / mean(den).
  double ratio_std_error() const noexcept {
    const double n = num.count;
    const double d = den.mean();
    if (n < 2.0 || d == 0.0) return 0.0;
    const double r = ratio();
    const double v = num.variance() - 2.0 * r * covariance() + r * r * den.variance();
    return std::sqrt(std::max(0.0, v) / n) / std::abs(d);
  }
};

}  // namespace revwel
