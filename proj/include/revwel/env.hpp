#pragma once

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

#include "revwel/errors.hpp"

namespace revwel {

/// Agent subset as a bitmask; bit i is agent i (0-indexed).
using AgentMask = std::uint64_t;

constexpr std::size_t kMaxAgents = 64;
constexpr std::size_t kMaxExplicitAgents = 20;

constexpr AgentMask full_mask(std::size_t n) noexcept {
  return n >= 64 ? ~AgentMask{0} : (AgentMask{1} << n) - 1;
}

constexpr bool contains(AgentMask s, std::size_t i) noexcept { return (s >> i) & 1U; }

inline double mask_weight(AgentMask s, std::span<const double> w) noexcept {
  double total = 0.0;
  while (s) {
    total += w[static_cast<std::size_t>(std::countr_zero(s))];
    s &= s - 1;
  }
  return total;
}

struct WeightedSet {
  AgentMask set = 0;
  double weight = 0.0;
};

struct PublicProject {};
struct SingleItem {};
struct KUniform {
  std::size_t k = 1;
};
struct Explicit {
  std::vector<AgentMask> sets;  ///< sorted, unique
};

/// Feasibility constraint: the family of agent sets that may be served together.
class FeasibilityEnvironment {
public:
  using Kind = std::variant<PublicProject, SingleItem, KUniform, Explicit>;

  FeasibilityEnvironment(std::size_t n, Kind kind) : n_(n), kind_(std::move(kind)) {
    if (n_ > kMaxAgents) throw ConfigError("at most 64 agents per environment");
    if (auto e = std::get_if<Explicit>(&kind_)) {
      if (n_ > kMaxExplicitAgents) throw ConfigError("explicit families support at most 20 agents");
      auto& sets = e->sets;
      std::sort(sets.begin(), sets.end());
      sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
      if (sets.empty()) throw ConfigError("explicit family must contain at least one set");
      for (AgentMask s : sets)
        if (s & ~full_mask(n_)) throw ConfigError("feasible set names an agent outside [n]");
      lookup_.insert(sets.begin(), sets.end());
    }
    downward_closed_ = compute_downward_closed();
  }

  static FeasibilityEnvironment public_project(std::size_t n) { return {n, PublicProject{}}; }
  static FeasibilityEnvironment single_item(std::size_t n) { return {n, SingleItem{}}; }
  static FeasibilityEnvironment k_uniform(std::size_t n, std::size_t k) { return {n, KUniform{k}}; }
  static FeasibilityEnvironment explicit_family(std::size_t n, std::vector<AgentMask> sets) {
    return {n, Explicit{std::move(sets)}};
  }

  std::size_t size() const noexcept { return n_; }
  const Kind& kind() const noexcept { return kind_; }

  template <class K>
  bool is() const noexcept {
    return std::holds_alternative<K>(kind_);
  }

  bool is_feasible(AgentMask s) const noexcept {
    if (s & ~full_mask(n_)) return false;
    const auto card = static_cast<std::size_t>(std::popcount(s));
    return std::visit(
        [&](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PublicProject>) return s == 0 || s == full_mask(n_);
          else if constexpr (std::is_same_v<K, SingleItem>) return card <= 1;
          else if constexpr (std::is_same_v<K, KUniform>) return card <= k.k;
          else return lookup_.contains(s);
        },
        kind_);
  }

  bool contains_empty() const noexcept { return is_feasible(0); }

  bool is_downward_closed() const noexcept { return downward_closed_; }

  /// All feasible sets in increasing mask order. Requires n <= 20.
  std::vector<AgentMask> enumerate() const {
    if (auto e = std::get_if<Explicit>(&kind_)) return e->sets;
    if (n_ > kMaxExplicitAgents) throw ConfigError("enumeration limited to 20 agents");
    std::vector<AgentMask> out;
    for (AgentMask s = 0; s <= full_mask(n_); ++s)
      if (is_feasible(s)) out.push_back(s);
    return out;
  }

  /// Size of the largest feasible set.
  std::size_t max_cardinality() const {
    return std::visit(
        [&](const auto& k) -> std::size_t {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PublicProject>) return n_;
          else if constexpr (std::is_same_v<K, SingleItem>) return n_ > 0 ? 1 : 0;
          else if constexpr (std::is_same_v<K, KUniform>) return std::min(k.k, n_);
          else {
            int best = 0;
            for (AgentMask s : k.sets) best = std::max(best, std::popcount(s));
            return static_cast<std::size_t>(best);
          }
        },
        kind_);
  }

  /// Feasible set maximizing the total weight; ties go to the smallest mask.
  /// Negative weights are kept, so families without the empty set may
  /// return a negative optimum.
  WeightedSet max_weight_set(std::span<const double> w) const {
    check_weights(w);
    return std::visit(
        [&](const auto& k) -> WeightedSet {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PublicProject>) {
            const double all = mask_weight(full_mask(n_), w);
            return all > 0.0 ? WeightedSet{full_mask(n_), all} : WeightedSet{0, 0.0};
          } else if constexpr (std::is_same_v<K, SingleItem>) {
            return top_k(w, 1);
          } else if constexpr (std::is_same_v<K, KUniform>) {
            return top_k(w, k.k);
          } else {
            return best_of(k.sets, w, false).value();
          }
        },
        kind_);
  }

  /// Best non-empty feasible set, if any.
  std::optional<WeightedSet> max_weight_nonempty(std::span<const double> w) const {
    check_weights(w);
    return std::visit(
        [&](const auto& k) -> std::optional<WeightedSet> {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PublicProject>) {
            if (n_ == 0) return std::nullopt;
            return WeightedSet{full_mask(n_), mask_weight(full_mask(n_), w)};
          } else if constexpr (std::is_same_v<K, SingleItem> || std::is_same_v<K, KUniform>) {
            std::size_t cap = 1;
            if constexpr (std::is_same_v<K, KUniform>) cap = k.k;
            if (n_ == 0 || cap == 0) return std::nullopt;
            const WeightedSet best = top_k(w, cap);
            if (best.set != 0) return best;
            // every weight <= 0: the single largest one, lowest index on ties
            std::size_t arg = 0;
            for (std::size_t i = 1; i < n_; ++i)
              if (w[i] > w[arg]) arg = i;
            return WeightedSet{AgentMask{1} << arg, w[arg]};
          } else {
            return best_of(k.sets, w, true);
          }
        },
        kind_);
  }

  /// Smallest downward-closed family containing this one (explicit only).
  FeasibilityEnvironment downward_closure() const {
    const auto* e = std::get_if<Explicit>(&kind_);
    if (!e) throw ConfigError("downward closure is defined for explicit families");
    std::unordered_set<AgentMask> closed;
    for (AgentMask s : e->sets) {
      if (closed.contains(s)) continue;  // submasks already present
      for (AgentMask t = s;; t = (t - 1) & s) {
        closed.insert(t);
        if (t == 0) break;
      }
    }
    return explicit_family(n_, std::vector<AgentMask>(closed.begin(), closed.end()));
  }

private:
  void check_weights(std::span<const double> w) const {
    if (w.size() != n_) throw std::invalid_argument("weight vector length differs from agent count");
  }

  // Largest-weight set of at most k agents: positive weights only, highest
  // first, lower index first among equal weights.
  WeightedSet top_k(std::span<const double> w, std::size_t k) const {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n_; ++i)
      if (w[i] > 0.0) idx.push_back(i);
    if (idx.size() > k) {
      std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                        [&](std::size_t a, std::size_t b) { return w[a] > w[b] || (w[a] == w[b] && a < b); });
      idx.resize(k);
    }
    AgentMask s = 0;
    for (std::size_t i : idx) s |= AgentMask{1} << i;
    return {s, mask_weight(s, w)};
  }

  static std::optional<WeightedSet> best_of(const std::vector<AgentMask>& sets, std::span<const double> w,
                                            bool skip_empty) {
    std::optional<WeightedSet> best;
    for (AgentMask s : sets) {
      if (skip_empty && s == 0) continue;
      const double total = mask_weight(s, w);
      if (!best || total > best->weight) best = WeightedSet{s, total};
    }
    return best;
  }

  bool compute_downward_closed() const {
    return std::visit(
        [&](const auto& k) -> bool {
          using K = std::decay_t<decltype(k)>;
          if constexpr (std::is_same_v<K, PublicProject>) return n_ <= 1;
          else if constexpr (std::is_same_v<K, Explicit>) {
            // enough to check every set minus one element
            for (AgentMask s : k.sets) {
              for (AgentMask rest = s; rest; rest &= rest - 1) {
                const AgentMask bit = rest & (~rest + 1);
                if (!lookup_.contains(s & ~bit)) return false;
              }
            }
            return true;
          } else {
            return true;
          }
        },
        kind_);
  }

  std::size_t n_;
  Kind kind_;
  std::unordered_set<AgentMask> lookup_;
  bool downward_closed_ = true;
};

}  // namespace revwel
