#include <gtest/gtest.h>

#include <bit>
#include <vector>

#include "oracles.hpp"
#include "revwel/env.hpp"
#include "revwel/rng.hpp"

using namespace revwel;

namespace {

AgentMask mask(std::initializer_list<int> one_indexed) {
  AgentMask m = 0;
  for (int i : one_indexed) m |= AgentMask{1} << (i - 1);
  return m;
}

FeasibilityEnvironment random_explicit(CounterEngine& rng, std::size_t n) {
  std::vector<AgentMask> sets;
  const auto count = 1 + rng.below(3 * n);
  for (std::uint64_t k = 0; k < count; ++k) sets.push_back(rng.below(std::uint64_t{1} << n));
  return FeasibilityEnvironment::explicit_family(n, sets);
}

}  // namespace

TEST(Feasibility, DocumentedValues) {
  EXPECT_FALSE(FeasibilityEnvironment::public_project(3).is_feasible(mask({1, 3})));
  EXPECT_TRUE(FeasibilityEnvironment::public_project(3).is_feasible(mask({1, 2, 3})));
  EXPECT_TRUE(FeasibilityEnvironment::public_project(3).is_feasible(0));
  EXPECT_TRUE(FeasibilityEnvironment::single_item(3).is_feasible(mask({2})));
  EXPECT_FALSE(FeasibilityEnvironment::single_item(3).is_feasible(mask({1, 2})));
  const auto e = FeasibilityEnvironment::explicit_family(2, {0, mask({1}), mask({1, 2})});
  EXPECT_FALSE(e.is_feasible(mask({2})));
  EXPECT_TRUE(e.is_feasible(mask({1, 2})));
  EXPECT_FALSE(FeasibilityEnvironment::k_uniform(4, 2).is_feasible(mask({1, 2, 3})));
  EXPECT_FALSE(FeasibilityEnvironment::single_item(3).is_feasible(mask({4})));
}

TEST(Feasibility, DownwardClosure) {
  EXPECT_FALSE(FeasibilityEnvironment::public_project(2).is_downward_closed());
  EXPECT_TRUE(FeasibilityEnvironment::public_project(1).is_downward_closed());
  EXPECT_TRUE(FeasibilityEnvironment::k_uniform(5, 2).is_downward_closed());
  EXPECT_TRUE(FeasibilityEnvironment::single_item(5).is_downward_closed());
  EXPECT_FALSE(FeasibilityEnvironment::explicit_family(2, {0, mask({1, 2})}).is_downward_closed());

  const auto closed = FeasibilityEnvironment::explicit_family(2, {0, mask({1, 2})}).downward_closure();
  EXPECT_EQ(closed.enumerate(), (std::vector<AgentMask>{0, mask({1}), mask({2}), mask({1, 2})}));
  EXPECT_EQ(closed.downward_closure().enumerate(), closed.enumerate());
  EXPECT_EQ(FeasibilityEnvironment::explicit_family(3, {mask({1, 2, 3})}).downward_closure().enumerate().size(), 8U);
}

TEST(Feasibility, ClosureIsAlwaysDownwardClosed) {
  CounterEngine rng(5, 0);
  for (int t = 0; t < 200; ++t) {
    const auto e = random_explicit(rng, 1 + rng.below(10));
    const auto c = e.downward_closure();
    EXPECT_TRUE(c.is_downward_closed());
    for (AgentMask s : e.enumerate()) EXPECT_TRUE(c.is_feasible(s));
  }
}

TEST(Feasibility, DownwardClosedMatchesDefinition) {
  CounterEngine rng(6, 0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(6);
    const auto e = random_explicit(rng, n);
    bool closed = true;
    for (AgentMask s : e.enumerate())
      for (AgentMask sub = s;; sub = (sub - 1) & s) {
        closed = closed && e.is_feasible(sub);
        if (sub == 0) break;
      }
    EXPECT_EQ(e.is_downward_closed(), closed);
  }
}

TEST(MaxWeight, DocumentedValues) {
  const std::vector<double> w1{0.3, 0.9};
  const auto a = FeasibilityEnvironment::single_item(2).max_weight_set(w1);
  EXPECT_EQ(a.set, mask({2}));
  EXPECT_DOUBLE_EQ(a.weight, 0.9);
  const std::vector<double> w2{-0.6, -0.4};
  const auto b = FeasibilityEnvironment::public_project(2).max_weight_set(w2);
  EXPECT_EQ(b.set, 0U);
  EXPECT_DOUBLE_EQ(b.weight, 0.0);
  const std::vector<double> w3{5, -1, 3};
  const auto c = FeasibilityEnvironment::k_uniform(3, 2).max_weight_set(w3);
  EXPECT_EQ(c.set, mask({1, 3}));
  EXPECT_DOUBLE_EQ(c.weight, 8.0);
}

TEST(MaxWeight, TiesGoToTheSmallestMask) {
  const std::vector<double> w{0.5, 0.5, 0.2};
  EXPECT_EQ(FeasibilityEnvironment::single_item(3).max_weight_set(w).set, mask({1}));
  const auto e = FeasibilityEnvironment::explicit_family(3, {mask({3}), mask({1, 3}), mask({2, 3})});
  EXPECT_EQ(e.max_weight_set(w).set, mask({1, 3}));
  const std::vector<double> zero{0.0, 0.0};
  EXPECT_EQ(FeasibilityEnvironment::public_project(2).max_weight_set(zero).set, 0U);
}

TEST(MaxWeight, KeepsNegativeWeightsWhenTheEmptySetIsInfeasible) {
  const auto e = FeasibilityEnvironment::explicit_family(2, {mask({1}), mask({1, 2})});
  const std::vector<double> w{-0.5, -0.2};
  const auto best = e.max_weight_set(w);
  EXPECT_EQ(best.set, mask({1}));
  EXPECT_DOUBLE_EQ(best.weight, -0.5);
}

TEST(MaxWeight, AgreesWithExhaustiveEnumeration) {
  CounterEngine rng(7, 0);
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.below(12);
    const auto e = random_explicit(rng, n);
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);
    const auto [set, weight] = oracle::brute_max_weight(n, w, [&](std::uint64_t s) { return e.is_feasible(s); });
    const auto got = e.max_weight_set(w);
    ASSERT_EQ(got.set, set);
    ASSERT_NEAR(got.weight, weight, 1e-12);
  }
}

TEST(MaxWeight, BuiltInKindsAgreeWithEnumeration) {
  CounterEngine rng(8, 0);
  for (int t = 0; t < 300; ++t) {
    const std::size_t n = 1 + rng.below(10);
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);
    for (const auto& e : {FeasibilityEnvironment::public_project(n), FeasibilityEnvironment::single_item(n),
                          FeasibilityEnvironment::k_uniform(n, 1 + rng.below(n))}) {
      const auto [set, weight] = oracle::brute_max_weight(n, w, [&](std::uint64_t s) { return e.is_feasible(s); });
      const auto got = e.max_weight_set(w);
      ASSERT_NEAR(got.weight, weight, 1e-12);
      ASSERT_EQ(got.set, set);
    }
  }
}

TEST(MaxWeight, MonotoneInEachWeightOnDownwardClosedFamilies) {
  CounterEngine rng(9, 0);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + rng.below(8);
    const auto e = random_explicit(rng, n).downward_closure();
    std::vector<double> w(n);
    for (auto& x : w) x = rng.uniform(0.0, 1.0);
    const double before = e.max_weight_set(w).weight;
    w[rng.below(n)] += rng.uniform(0.0, 1.0);
    EXPECT_GE(e.max_weight_set(w).weight, before - 1e-15);
  }
}

TEST(MaxWeight, BestNonEmptySet) {
  const std::vector<double> w{-0.3, -0.1};
  const auto s = FeasibilityEnvironment::single_item(2).max_weight_nonempty(w);
  ASSERT_TRUE(s);
  EXPECT_EQ(s->set, mask({2}));
  const auto p = FeasibilityEnvironment::public_project(2).max_weight_nonempty(w);
  ASSERT_TRUE(p);
  EXPECT_NEAR(p->weight, -0.4, 1e-15);
  EXPECT_FALSE(FeasibilityEnvironment::explicit_family(2, {0}).max_weight_nonempty(w));
}

TEST(Construction, RejectsBadFamilies) {
  EXPECT_THROW(FeasibilityEnvironment::explicit_family(2, {}), ConfigError);
  EXPECT_THROW(FeasibilityEnvironment::explicit_family(2, {mask({3})}), ConfigError);
  EXPECT_THROW(FeasibilityEnvironment::explicit_family(21, {0}), ConfigError);
  EXPECT_THROW(FeasibilityEnvironment::single_item(65), ConfigError);
  const std::vector<double> w{1.0};
  EXPECT_THROW(FeasibilityEnvironment::single_item(2).max_weight_set(w), std::invalid_argument);
}
