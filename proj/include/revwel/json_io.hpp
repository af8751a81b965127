#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "revwel/anticonc.hpp"
#include "revwel/dist.hpp"
#include "revwel/env.hpp"
#include "revwel/errors.hpp"

namespace revwel::json_io {

using Json = nlohmann::json;

namespace detail {

inline double number(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw ConfigError(std::string("missing numeric field '") + key + "'");
  return j.at(key).get<double>();
}

inline std::size_t count(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number_unsigned())
    throw ConfigError(std::string("missing non-negative integer field '") + key + "'");
  return j.at(key).get<std::size_t>();
}

inline std::string kind_of(const Json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError("expected an object with a string 'kind'");
  return j.at("kind").get<std::string>();
}

}  // namespace detail

/// {"kind":"uniform","lo":0,"hi":1}, {"kind":"exponential","rate":1},
/// {"kind":"pareto","alpha":2,"scale":1}, {"kind":"equal_revenue"},
/// {"kind":"counterexample"}, {"kind":"empirical","samples":[...]}.
inline Distribution parse_distribution(const Json& j) {
  const auto kind = detail::kind_of(j);
  if (kind == "uniform") return Distribution::uniform(detail::number(j, "lo"), detail::number(j, "hi"));
  if (kind == "exponential") return Distribution::exponential(detail::number(j, "rate"));
  if (kind == "pareto") return Distribution::pareto(detail::number(j, "alpha"), detail::number(j, "scale"));
  if (kind == "equal_revenue") return Distribution::equal_revenue();
  if (kind == "counterexample") return Distribution::counterexample();
  if (kind == "empirical") {
    if (!j.contains("samples") || !j.at("samples").is_array()) throw ConfigError("empirical needs 'samples'");
    return Distribution::empirical(j.at("samples").get<std::vector<double>>());
  }
  throw ConfigError("unknown distribution kind '" + kind + "'");
}

/// {"kind":"public_project","n":8}, {"kind":"single_item","n":2},
/// {"kind":"k_uniform","n":8,"k":3}, {"kind":"explicit","n":3,"sets":[[],[1],[1,2]]}
/// with 1-indexed agents. `n_override` replaces "n" (used with n lists).
inline FeasibilityEnvironment parse_environment(const Json& j, std::optional<std::size_t> n_override = {}) {
  const auto kind = detail::kind_of(j);
  const std::size_t n = n_override ? *n_override : detail::count(j, "n");
  if (kind == "public_project") return FeasibilityEnvironment::public_project(n);
  if (kind == "single_item") return FeasibilityEnvironment::single_item(n);
  if (kind == "k_uniform") return FeasibilityEnvironment::k_uniform(n, detail::count(j, "k"));
  if (kind == "explicit") {
    if (!j.contains("sets") || !j.at("sets").is_array()) throw ConfigError("explicit needs 'sets'");
    std::vector<AgentMask> sets;
    for (const auto& s : j.at("sets")) {
      AgentMask mask = 0;
      for (const auto& a : s) {
        if (!a.is_number_unsigned()) throw ConfigError("agents are positive integers");
        const auto i = a.get<std::size_t>();
        if (i < 1 || i > n) throw ConfigError("agent index outside [1, n]");
        mask |= AgentMask{1} << (i - 1);
      }
      sets.push_back(mask);
    }
    return FeasibilityEnvironment::explicit_family(n, std::move(sets));
  }
  throw ConfigError("unknown environment kind '" + kind + "'");
}

/// {"atoms":[[value, prob], ...]} or a distribution object with optional
/// "shift" and "scale" (the model shift + scale * X).
inline RandomVariableModel parse_model(const Json& j) {
  if (j.is_object() && j.contains("atoms")) {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2) throw ConfigError("atoms are [value, probability] pairs");
      atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    return FiniteModel(std::move(atoms));
  }
  AnalyticModel m{parse_distribution(j)};
  if (j.contains("shift")) m.shift = detail::number(j, "shift");
  if (j.contains("scale")) m.scale = detail::number(j, "scale");
  return m;
}

}  // namespace revwel::json_io
