#pragma once

// Shared instance generators for the unit and acceptance tests.

#include <cstddef>
#include <vector>

#include "revwel/env.hpp"
#include "revwel/rng.hpp"

namespace fixture {

/// Explicit family on n agents: the empty set, one random non-empty set and
/// up to 2n more random sets.
inline revwel::FeasibilityEnvironment random_family(revwel::CounterEngine& rng, std::size_t n) {
  const revwel::AgentMask all = (revwel::AgentMask{1} << n) - 1;
  std::vector<revwel::AgentMask> sets{0, 1 + rng.below(all)};
  const auto count = rng.below(2 * n + 1);
  for (std::uint64_t k = 0; k < count; ++k) sets.push_back(rng.below(revwel::AgentMask{1} << n));
  return revwel::FeasibilityEnvironment::explicit_family(n, std::move(sets));
}

/// The downward closure of a random family.
inline revwel::FeasibilityEnvironment random_downward_closed(revwel::CounterEngine& rng, std::size_t n) {
  return random_family(rng, n).downward_closure();
}

}  // namespace fixture
