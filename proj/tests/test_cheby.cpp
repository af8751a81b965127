#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "revwel/cheby.hpp"

using namespace revwel;

namespace {

const RealFn identity = [](double x) { return x; };
const RealFn one = [](double) { return 1.0; };

// E[k(X)] for a finite model, straight from the atoms.
double expect(const FiniteModel& x, const RealFn& k) {
  double s = 0.0;
  for (const auto& a : x.atoms()) s += k(a.value) * a.prob;
  return s;
}

}  // namespace

TEST(WeightedRatio, DocumentedValues) {
  const AnalyticModel u{Distribution::uniform(0, 1)};
  const auto r = weighted_ratio_inequality({identity, identity, one, u, {}});
  EXPECT_NEAR(r.lhs, 2.0 / 3.0, 1e-10);
  EXPECT_NEAR(r.rhs, 0.5, 1e-10);
  EXPECT_TRUE(r.ok);
  EXPECT_TRUE(r.hypotheses_hold());

  const RealFn constant = [](double) { return 3.0; };
  const auto eq = weighted_ratio_inequality({constant, identity, identity, u, {}});
  EXPECT_NEAR(eq.lhs, eq.rhs, 1e-12);
  EXPECT_TRUE(eq.ok);

  // phi(x) = 2x - 1: f = phi^+ / x with f(0) = 0
  const RealFn f = [](double x) { return x > 0.0 ? std::max(0.0, 2.0 * x - 1.0) / x : 0.0; };
  const RealFn step = StepFunction{{0.3, 0.7}, {0.1, 0.5, 0.9}};
  const auto thm = weighted_ratio_inequality({f, step, identity, u, {0.3, 0.5, 0.7}});
  EXPECT_NEAR(thm.rhs, 0.5, 1e-9);
  EXPECT_TRUE(thm.ok);
  EXPECT_TRUE(thm.hypotheses_hold());
}

TEST(WeightedRatio, AnalyticMatchesSimpson) {
  const AnalyticModel e{Distribution::exponential(1.0)};
  const RealFn f = [](double x) { return std::tanh(x - 1.0); };
  const RealFn g = [](double x) { return 1.0 + x * x; };
  const RealFn h = [](double x) { return x < 2.0 ? 1.0 : 0.5; };
  const auto r = weighted_ratio_inequality({f, g, h, e, {2.0}});
  // h is 1 on [0, 2) and 1/2 beyond, taken per piece so Simpson never sees the jump
  auto moment = [](const RealFn& k) {
    return oracle::simpson([&](double x) { return k(x) * std::exp(-x); }, 0.0, 2.0, 20000) +
           0.5 * oracle::simpson([&](double x) { return k(x) * std::exp(-x); }, 2.0, 60.0, 200000);
  };
  const double lhs = moment([&](double x) { return f(x) * g(x); }) / moment(g);
  const double rhs = moment(f) / moment(one);
  EXPECT_NEAR(r.lhs, lhs, 1e-8);
  EXPECT_NEAR(r.rhs, rhs, 1e-8);
  EXPECT_TRUE(r.ok);
}

TEST(WeightedRatio, AffineAnalyticModels) {
  // X = 1 - 2U on [-1, 1]: E[X^2] / E[X] is undefined, use h = 1 and f = g = x
  const AnalyticModel x{Distribution::uniform(0, 1), 1.0, -2.0};
  const auto r = weighted_ratio_inequality({identity, [](double v) { return v + 2.0; }, one, x, {}});
  // E[X(X+2)] / E[X+2] = (1/3) / 2
  EXPECT_NEAR(r.lhs, 1.0 / 6.0, 1e-10);
  EXPECT_NEAR(r.rhs, 0.0, 1e-10);
  EXPECT_TRUE(r.ok);
}

TEST(WeightedRatio, DegenerateDenominators) {
  const FiniteModel x({{0.0, 0.5}, {1.0, 0.5}});
  const RealFn zero = [](double) { return 0.0; };
  EXPECT_THROW(weighted_ratio_inequality({identity, one, zero, x, {}}), DegenerateDenominator);
  const RealFn low = [](double v) { return v < 0.5 ? 1.0 : 0.0; };
  EXPECT_THROW(weighted_ratio_inequality({identity, identity, low, x, {}}), DegenerateDenominator);
}

TEST(WeightedRatio, RandomTriplesSatisfyTheInequality) {
  CounterEngine rng(51, 0);
  for (int t = 0; t < 1000; ++t) {
    const auto triple = random_monotone_triple(rng);
    const auto r = weighted_ratio_inequality(triple);
    ASSERT_TRUE(r.hypotheses_hold()) << t;
    ASSERT_TRUE(r.ok) << t << " lhs " << r.lhs << " rhs " << r.rhs;
    const auto& x = std::get<FiniteModel>(triple.x);
    const double lhs = expect(x, [&](double v) { return triple.f(v) * triple.g(v) * triple.h(v); }) /
                       expect(x, [&](double v) { return triple.g(v) * triple.h(v); });
    ASSERT_NEAR(r.lhs, lhs, 1e-12 * (1.0 + std::abs(lhs)));
  }
}

TEST(WeightedRatio, NonMonotoneControlIsCaught) {
  // f decreasing against increasing g reverses the inequality strictly
  const FiniteModel x({{0.0, 0.5}, {1.0, 0.5}});
  const RealFn f = [](double v) { return 1.0 - v; };
  const auto r = weighted_ratio_inequality({f, identity, one, x, {}});
  EXPECT_FALSE(r.f_monotone);
  EXPECT_FALSE(r.ok);
  EXPECT_NEAR(r.lhs, 0.0, 1e-15);
  EXPECT_NEAR(r.rhs, 0.5, 1e-15);

  CounterEngine rng(52, 0);
  int caught = 0;
  for (int t = 0; t < 200; ++t) {
    auto triple = random_monotone_triple(rng);
    const auto base = triple.f;
    triple.f = [base](double v) { return -base(v); };
    const auto flipped = weighted_ratio_inequality(triple);
    caught += flipped.ok ? 0 : 1;
  }
  EXPECT_GT(caught, 100);
}

TEST(Helpers, PiecewiseAndStep) {
  const PiecewiseLinear p{{0, 1, 3}, {1, 3, 4}};
  EXPECT_DOUBLE_EQ(p(-1), 1.0);
  EXPECT_DOUBLE_EQ(p(0.5), 2.0);
  EXPECT_DOUBLE_EQ(p(2), 3.5);
  EXPECT_DOUBLE_EQ(p(9), 4.0);
  const StepFunction s{{1, 2}, {0, 5, 7}};
  EXPECT_EQ(s(0.5), 0.0);
  EXPECT_EQ(s(1.0), 5.0);
  EXPECT_EQ(s(2.5), 7.0);
}

TEST(HyperRegularAudit, SingleItemUniform) {
  const Market m(FeasibilityEnvironment::single_item(2), {Distribution::uniform(0, 1)});
  const auto a = hyper_regular_audit(m, 2.0, 100000, 1);
  EXPECT_FALSE(a.skipped);
  EXPECT_TRUE(a.ok());
  ASSERT_EQ(a.agents.size(), 2U);
  for (const auto& agent : a.agents) {
    EXPECT_TRUE(agent.g_monotone);
    EXPECT_EQ(agent.g.size(), kAuditBins);
    EXPECT_NEAR(agent.g.front().mean, 0.0, 1e-12);  // below the reserve
    EXPECT_GT(agent.g.back().mean, 0.9);
  }
  // E[(2 max - 1)^+] for the max of two uniforms is 5/12
  EXPECT_NEAR(a.virtual_total.mean, 5.0 / 12.0, 3.0 * a.virtual_total.std_error);
}

TEST(HyperRegularAudit, KUniformPareto) {
  const Market m(FeasibilityEnvironment::k_uniform(3, 2), {Distribution::pareto(2, 1)});
  const auto a = hyper_regular_audit(m, 2.0, 50000, 2);
  EXPECT_FALSE(a.skipped);
  EXPECT_TRUE(a.ok());
}

TEST(HyperRegularAudit, OneAgentIsTheBoundednessDefinition) {
  const Market m(FeasibilityEnvironment::single_item(1), {Distribution::exponential(1)});
  const auto a = hyper_regular_audit(m, 3.0, 100000, 3);
  ASSERT_FALSE(a.skipped);
  // E[phi^+] = rho = 1/e for the exponential; E[X] / c = 1/3
  EXPECT_NEAR(a.virtual_total.mean, std::exp(-1.0), 3.0 * a.virtual_total.std_error);
  EXPECT_NEAR(a.value_total.mean * 3.0, std::exp(-1.0) * 2.0, 3.0 * 3.0 * a.value_total.std_error);
  EXPECT_TRUE(a.ok());
}

TEST(HyperRegularAudit, SkipsWhenHypothesesFail) {
  const Market ce(FeasibilityEnvironment::single_item(2), {Distribution::counterexample()});
  const auto a = hyper_regular_audit(ce, 6.0, 1000, 1);
  EXPECT_TRUE(a.skipped);
  EXPECT_NE(a.reason.find("hyper-regular"), std::string::npos);
  const Market pp(FeasibilityEnvironment::public_project(2), {Distribution::uniform(0, 1)});
  EXPECT_TRUE(hyper_regular_audit(pp, 2.0, 1000, 1).skipped);
  const Market loose(FeasibilityEnvironment::single_item(2), {Distribution::uniform(0, 1)});
  EXPECT_TRUE(hyper_regular_audit(loose, 1.5, 1000, 1).skipped);
}

TEST(HyperRegularAudit, TestMatrix) {
  const std::vector<std::pair<Distribution, double>> dists{
      {Distribution::uniform(0, 1), 2.0}, {Distribution::pareto(2, 1), 2.0}, {Distribution::exponential(1), 3.0}};
  for (std::size_t n : {1, 2, 4, 8}) {
    for (const auto& env : {FeasibilityEnvironment::single_item(n), FeasibilityEnvironment::k_uniform(n, (n + 1) / 2)}) {
      for (const auto& [d, c] : dists) {
        const auto a = hyper_regular_audit(Market(env, {d}), c, 20000, n);
        EXPECT_FALSE(a.skipped) << a.reason;
        EXPECT_TRUE(a.ok()) << d.name() << " n=" << n;
      }
    }
  }
}
