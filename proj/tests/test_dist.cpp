#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "revwel/classify.hpp"
#include "revwel/dist.hpp"
#include "revwel/revenue_curve.hpp"
#include "revwel/rng.hpp"

using namespace revwel;

namespace {

std::vector<Distribution> continuous_kinds() {
  return {Distribution::uniform(0.0, 1.0), Distribution::uniform(2.0, 5.0), Distribution::exponential(1.0),
          Distribution::exponential(3.0),  Distribution::pareto(2.0, 1.0),  Distribution::pareto(3.5, 0.5),
          Distribution::equal_revenue(),   Distribution::counterexample()};
}

std::vector<Distribution> all_kinds() {
  auto v = continuous_kinds();
  v.push_back(Distribution::empirical({0.1, 0.5, 0.5, 0.9, 1.7, 2.0}));
  return v;
}

double ks_distance(std::vector<double> xs, const std::function<double(double)>& cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(f - static_cast<double>(i + 1) / n)});
  }
  return d;
}

}  // namespace

TEST(Cdf, DocumentedValues) {
  EXPECT_DOUBLE_EQ(Distribution::uniform(0, 1).cdf(0.5), 0.5);
  EXPECT_NEAR(Distribution::equal_revenue().cdf(4.0), 0.75, 1e-15);
  EXPECT_NEAR(Distribution::counterexample().cdf(0.0), 0.0, 1e-12);
  EXPECT_EQ(Distribution::uniform(0, 1).cdf(-1.0), 0.0);
  EXPECT_EQ(Distribution::exponential(1).cdf(-1.0), 0.0);
}

TEST(Cdf, MonotoneAndBounded) {
  for (const auto& d : all_kinds()) {
    double prev = 0.0;
    for (double x = -1.0; x < 50.0; x += 0.01) {
      const double f = d.cdf(x);
      ASSERT_GE(f, prev - 1e-15) << d.name() << " at " << x;
      ASSERT_GE(f, 0.0);
      ASSERT_LE(f, 1.0);
      prev = f;
    }
  }
}

TEST(Quantile, DocumentedValues) {
  EXPECT_NEAR(Distribution::uniform(0, 1).quantile(0.25), 0.25, 1e-15);
  const auto er = Distribution::equal_revenue();
  const double oracle_q = oracle::bisect([&](double x) { return 1.0 - 1.0 / x - 0.75; }, 1.0, 100.0);
  EXPECT_NEAR(er.quantile(0.75), 4.0, 1e-12);
  EXPECT_NEAR(er.quantile(0.75), oracle_q, 1e-10);
  EXPECT_NEAR(Distribution::counterexample().quantile(0.0), 0.0, 1e-12);
}

TEST(Quantile, RejectsOutOfRange) {
  const auto d = Distribution::uniform(0, 1);
  EXPECT_THROW(d.quantile(1.0), std::invalid_argument);
  EXPECT_THROW(d.quantile(-0.1), std::invalid_argument);
  EXPECT_THROW(d.quantile(std::nan("")), std::invalid_argument);
}

TEST(Quantile, RoundTripsOnContinuousKinds) {
  CounterEngine rng(11, 0);
  for (const auto& d : continuous_kinds()) {
    for (int k = 0; k < 1000; ++k) {
      const double q = rng.uniform() * 0.999999;
      ASSERT_NEAR(d.cdf(d.quantile(q)), q, 1e-8) << d.name() << " q=" << q;
      const double x = d.quantile(rng.uniform() * 0.999);
      if (x <= d.support_lo()) continue;
      ASSERT_NEAR(d.quantile(d.cdf(x)), x, 1e-8 * std::max(1.0, x)) << d.name() << " x=" << x;
    }
  }
}

TEST(Quantile, EmpiricalGaloisInequalities) {
  const auto d = Distribution::empirical({0.1, 0.5, 0.5, 0.9, 1.7, 2.0});
  CounterEngine rng(12, 0);
  for (int k = 0; k < 1000; ++k) {
    const double q = rng.uniform() * 0.999;
    ASSERT_GE(d.cdf(d.quantile(q)), q - 1e-12);
    const double x = rng.uniform(0.1, 2.5);
    if (d.cdf(x) < 1.0) {
      ASSERT_LE(d.quantile(d.cdf(x)), x);
    }
  }
  EXPECT_DOUBLE_EQ(d.quantile(0.3), 0.5);
  EXPECT_DOUBLE_EQ(d.quantile(0.0), 0.1);
}

TEST(VirtualValue, DocumentedValues) {
  const auto u = Distribution::uniform(0, 1);
  EXPECT_NEAR(u.virtual_value(0.75), 0.5, 1e-15);
  EXPECT_NEAR(u.virtual_value(0.5), 0.0, 1e-15);
  const double delta = oracle::delta();
  const double e = std::numbers::e;
  EXPECT_NEAR(Distribution::counterexample().virtual_value(e - delta), -delta + 2.0 * e / 3.0, 1e-12);
  EXPECT_NEAR(Distribution::pareto(2, 1).virtual_value(2.0), 1.0, 1e-15);
  EXPECT_NEAR(Distribution::exponential(2).virtual_value(1.0), 0.5, 1e-15);
}

TEST(VirtualValue, MatchesDefinition) {
  CounterEngine rng(13, 0);
  for (const auto& d : continuous_kinds()) {
    for (int k = 0; k < 200; ++k) {
      const double x = d.quantile(rng.uniform() * 0.99);
      if (d.pdf(x) <= 0.0) continue;
      const double def = x - d.survival(x) / d.pdf(x);
      ASSERT_NEAR(d.virtual_value(x), def, 1e-9 * (1.0 + std::abs(def))) << d.name();
    }
  }
}

TEST(VirtualValue, UndefinedOutsideSupport) {
  EXPECT_THROW(Distribution::uniform(0, 1).virtual_value(1.5), UndefinedDensity);
  EXPECT_THROW(Distribution::pareto(2, 1).virtual_value(0.5), UndefinedDensity);
  EXPECT_THROW(Distribution::empirical({1.0, 2.0}).virtual_value(1.0), UndefinedDensity);
}

TEST(CounterExample, DeltaSolvesItsEquation) {
  const double d = counterexample_delta();
  EXPECT_NEAR(d, oracle::delta(), 1e-12);
  EXPECT_NEAR(d * std::log(d) * std::log(d), 1.0, 1e-12);
}

TEST(CounterExample, MeanEqualsOneOverLogDelta) {
  const auto d = Distribution::counterexample();
  EXPECT_NEAR(d.mean(), oracle::kCounterexampleMean, 1e-9);
  EXPECT_NEAR(d.mean(), 1.0 / std::log(oracle::delta()), 1e-9);
}

TEST(Mean, AgainstSimpsonOfSurvival) {
  EXPECT_NEAR(Distribution::uniform(2, 5).mean(), 3.5, 1e-12);
  EXPECT_NEAR(Distribution::exponential(4).mean(), 0.25, 1e-10);
  EXPECT_NEAR(Distribution::pareto(2, 1).mean(), 2.0, 1e-9);
  const auto p = Distribution::pareto(3.5, 0.5);
  // E X = lo + \int_lo^inf S, with the far tail in closed form
  const double body = oracle::simpson([&](double x) { return p.survival(x); }, 0.5, 200.0, 400000);
  const double tail = std::pow(0.5, 3.5) * std::pow(200.0, -2.5) / 2.5;
  EXPECT_NEAR(p.mean(), 0.5 + body + tail, 1e-7);
  EXPECT_TRUE(std::isinf(Distribution::equal_revenue().mean()));
  EXPECT_TRUE(std::isinf(Distribution::pareto(1.0, 1.0).mean()));
  EXPECT_NEAR(Distribution::empirical({1, 2, 6}).mean(), 3.0, 1e-15);
}

TEST(Sampling, KolmogorovSmirnov) {
  for (const auto& d : continuous_kinds()) {
    CounterEngine rng(21, 0);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = d.sample(rng);
    EXPECT_LE(ks_distance(xs, [&](double x) { return d.cdf(x); }), 0.01) << d.name();
  }
}

TEST(Sampling, UniformVirtualValuesAreUniformOnMinusOneOne) {
  const auto d = Distribution::uniform(0, 1);
  CounterEngine rng(22, 0);
  std::vector<double> phis(100000);
  for (auto& p : phis) p = d.virtual_value(d.sample(rng));
  EXPECT_LE(ks_distance(phis, [](double t) { return std::clamp((t + 1.0) / 2.0, 0.0, 1.0); }), 0.01);
}

TEST(Ironing, DocumentedValues) {
  EXPECT_NEAR(ironed_virtual_value(Distribution::uniform(0, 1), 0.75, 1024), 0.5, 1e-3);
  EXPECT_NEAR(ironed_virtual_value(Distribution::pareto(2, 1), 2.0, 1024), 1.0, 1e-3);
  EXPECT_THROW(VirtualValueCurve(Distribution::uniform(0, 1), 8), std::invalid_argument);
}

TEST(Ironing, EndpointClampsToTopNode) {
  for (const auto& d : all_kinds()) {
    const VirtualValueCurve c(d, 512);
    const double top = c.ironed().back().phi;
    if (std::isfinite(d.support_hi())) {
      EXPECT_DOUBLE_EQ(c.ironed_value(d.support_hi()), top) << d.name();
      EXPECT_DOUBLE_EQ(c.ironed_value(d.support_hi() + 1.0), top) << d.name();
      EXPECT_LE(c.ironed_value(d.quantile(0.999999)), top + 1e-9) << d.name();
    } else {
      // unbounded tails keep the exact virtual value beyond the last node
      const double x = d.quantile(0.999999);
      EXPECT_GE(c.ironed_value(x), c.ironed()[c.grid_size() - 1].phi - 1e-9) << d.name();
      EXPECT_NEAR(c.ironed_value(x), d.virtual_value(x), 1e-9 * (1.0 + std::abs(x))) << d.name();
    }
  }
}

TEST(Ironing, NonDecreasingOnEveryKind) {
  for (const auto& d : all_kinds()) {
    const VirtualValueCurve c(d, 1024);
    const auto nodes = c.ironed();
    for (std::size_t j = 1; j < nodes.size(); ++j)
      ASSERT_GE(nodes[j].phi, nodes[j - 1].phi - 1e-9 * (1.0 + std::abs(nodes[j - 1].phi))) << d.name() << " node " << j;
  }
}

TEST(Ironing, EqualsPhiWhereTheCurveTouchesItsMajorant) {
  for (const auto& d : continuous_kinds()) {
    const VirtualValueCurve c(d, 1024);
    const auto raw = c.grid();
    const auto ironed = c.ironed();
    const std::size_t n = raw.size() - 1;
    for (std::size_t k = 1; k + 1 < raw.size(); ++k) {
      const std::size_t j = n - k;  // grid() is in increasing x, node j has q = j / N
      if (!c.touches(j) || !std::isfinite(raw[k].phi)) continue;
      ASSERT_NEAR(ironed[k].phi, raw[k].phi, 1e-6 * (1.0 + std::abs(raw[k].phi))) << d.name() << " node " << k;
    }
  }
}

TEST(Ironing, EmpiricalWithNonConcaveRevenueIsIroned) {
  // revenue curve dips in the middle, forcing a flat ironed stretch
  const auto d = Distribution::empirical({0.1, 0.2, 0.3, 3.0, 3.1, 10.0});
  const VirtualValueCurve c(d, 600);
  const auto nodes = c.ironed();
  for (std::size_t j = 1; j < nodes.size(); ++j) ASSERT_GE(nodes[j].phi, nodes[j - 1].phi - 1e-9);
}

TEST(Monopoly, DocumentedValues) {
  const auto u = monopoly(Distribution::uniform(0, 1));
  EXPECT_NEAR(u.price, 0.5, 1e-6);
  EXPECT_NEAR(u.revenue, 0.25, 1e-12);
  const auto er = monopoly(Distribution::equal_revenue());
  EXPECT_NEAR(er.price, 1.0, 1e-12);
  EXPECT_NEAR(er.revenue, 1.0, 1e-12);
  const auto p = monopoly(Distribution::pareto(2, 1));
  EXPECT_NEAR(p.price, 1.0, 1e-12);
  EXPECT_NEAR(p.revenue, 1.0, 1e-12);
  const auto ce = monopoly(Distribution::counterexample());
  EXPECT_NEAR(ce.price, oracle::kCounterexampleMonopolyPrice, 1e-8);
  EXPECT_NEAR(ce.revenue, oracle::kCounterexampleRho, 1e-11);
}

TEST(Monopoly, AgreesWithFineGridSearch) {
  for (const auto& d : continuous_kinds()) {
    double best = 0.0;
    for (int k = 0; k < 200000; ++k) {
      const double p = d.quantile(k / 200000.0);
      best = std::max(best, p * d.survival(p));
    }
    EXPECT_GE(monopoly(d).revenue, best - 1e-12) << d.name();
    EXPECT_NEAR(monopoly(d).revenue, best, 1e-6) << d.name();
  }
}

TEST(Monopoly, RevenueDominatesEveryPostedPrice) {
  CounterEngine rng(31, 0);
  for (const auto& d : all_kinds()) {
    const double rho = monopoly(d).revenue;
    for (int k = 0; k < 1000; ++k) {
      const double x = d.quantile(rng.uniform() * 0.9999);
      ASSERT_GE(rho, x * d.survival(x) - 1e-12 * (1.0 + rho)) << d.name();
    }
  }
}

TEST(Monopoly, RegularPriceIsAZeroOfPhi) {
  for (const auto& d : {Distribution::uniform(0, 1), Distribution::exponential(2), Distribution::counterexample()})
    EXPECT_NEAR(d.virtual_value(monopoly(d).price), 0.0, 1e-7) << d.name();
}

TEST(Classify, DocumentedValues) {
  const auto u = Distribution::uniform(0, 1);
  const auto u2 = classify(u, 2.0);
  EXPECT_TRUE(u2.c_bounded);
  EXPECT_FALSE(u2.strongly_c_bounded);
  EXPECT_TRUE(classify(u, 4.0).strongly_c_bounded);
  const auto ce = classify(Distribution::counterexample(), 6.0);
  EXPECT_TRUE(ce.c_bounded);
  EXPECT_TRUE(ce.regular);
  EXPECT_FALSE(ce.hyper_regular);
  EXPECT_FALSE(classify(Distribution::equal_revenue(), 1e6).c_bounded);
}

TEST(Classify, ShapeOfEachKind) {
  const auto u = classify(Distribution::uniform(0, 1), 2.0);
  EXPECT_TRUE(u.mhr && u.hyper_regular && u.regular);
  const auto e = classify(Distribution::exponential(1), 3.0);
  EXPECT_TRUE(e.mhr && e.hyper_regular && e.regular);
  EXPECT_TRUE(e.c_bounded);  // e * rho = 1 = mean, and 3 > e
  const auto p = classify(Distribution::pareto(2, 1), 2.0);
  EXPECT_FALSE(p.mhr);
  EXPECT_TRUE(p.hyper_regular && p.c_bounded);
  const auto er = classify(Distribution::equal_revenue(), 2.0);
  EXPECT_TRUE(er.regular);
  EXPECT_FALSE(er.c_bounded);
}

TEST(Classify, ImplicationChains) {
  for (const auto& d : all_kinds()) {
    for (double c : {1.0, 2.0, 4.0, 10.0}) {
      const auto r = classify(d, c);
      EXPECT_TRUE(!r.mhr || r.hyper_regular) << d.name();
      EXPECT_TRUE(!r.hyper_regular || r.regular) << d.name();
      EXPECT_TRUE(!r.strongly_c_bounded || r.c_bounded) << d.name();
    }
  }
}

TEST(Classify, RejectsBadArguments) {
  const auto u = Distribution::uniform(0, 1);
  EXPECT_THROW(classify(u, 0.0), std::invalid_argument);
  EXPECT_THROW(classify(u, 2.0, 32), std::invalid_argument);
}

TEST(Construction, RejectsInvalidParameters) {
  EXPECT_THROW(Distribution::uniform(1, 1), ConfigError);
  EXPECT_THROW(Distribution::uniform(-1, 1), ConfigError);
  EXPECT_THROW(Distribution::exponential(0), ConfigError);
  EXPECT_THROW(Distribution::pareto(2, 0), ConfigError);
  EXPECT_THROW(Distribution::empirical({}), ConfigError);
  EXPECT_THROW(Distribution::empirical({-1.0}), ConfigError);
}
