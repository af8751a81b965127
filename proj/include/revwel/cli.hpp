#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revwel/anticonc.hpp"
#include "revwel/cheby.hpp"
#include "revwel/classify.hpp"
#include "revwel/csv.hpp"
#include "revwel/json_io.hpp"
#include "revwel/mech.hpp"
#include "revwel/sim.hpp"

namespace revwel::cli {

using Json = nlohmann::json;

enum ExitCode : int { kPass = 0, kFailedCheck = 1, kConfigError = 2 };

inline const std::vector<std::string>& experiments() {
  static const std::vector<std::string> ids{"classify",       "ratio",     "audit",    "asymptotics",
                                            "counterexample", "anticoncentration", "chebyshev"};
  return ids;
}

struct ExperimentConfig {
  std::string experiment;
  Json env;                 ///< null when absent
  std::vector<Json> dists;  ///< one entry is replicated to every agent
  std::optional<double> c;
  std::vector<std::size_t> n_list;
  std::uint64_t samples = 100000;
  std::uint64_t seed = 42;
  std::string out;  ///< empty: stdout
  std::string mechanism = "optimal";
  Json extra = Json::object();  ///< experiment-specific keys (models, values, interval, triples)

  Json to_json() const {
    Json j = extra;
    j["experiment"] = experiment;
    if (!env.is_null()) j["env"] = env;
    if (!dists.empty()) j["dists"] = dists;
    if (c) j["c"] = *c;
    if (!n_list.empty()) j["n_list"] = n_list;
    j["samples"] = samples;
    j["seed"] = seed;
    j["mechanism"] = mechanism;
    return j;
  }
};

/// Reads the keys of a JSON config file into `cfg`; known keys are typed,
/// the rest land in `extra`.
inline void merge_config(ExperimentConfig& cfg, const Json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "experiment") cfg.experiment = value.get<std::string>();
    else if (key == "env") cfg.env = value;
    else if (key == "dist") cfg.dists = {value};
    else if (key == "dists") cfg.dists = value.get<std::vector<Json>>();
    else if (key == "c") cfg.c = value.get<double>();
    else if (key == "n_list") cfg.n_list = value.get<std::vector<std::size_t>>();
    else if (key == "samples") cfg.samples = value.get<std::uint64_t>();
    else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
    else if (key == "out") cfg.out = value.get<std::string>();
    else if (key == "mechanism") cfg.mechanism = value.get<std::string>();
    else cfg.extra[key] = value;
  }
}

namespace detail {

inline double require_c(const ExperimentConfig& cfg) {
  if (!cfg.c) throw ConfigError("this experiment needs --c");
  return *cfg.c;
}

inline std::vector<Distribution> parse_dists(const ExperimentConfig& cfg) {
  if (cfg.dists.empty()) throw ConfigError("this experiment needs --dist or --dists");
  std::vector<Distribution> out;
  for (const auto& d : cfg.dists) out.push_back(json_io::parse_distribution(d));
  return out;
}

// One environment per requested n, or the config's own n.
inline std::vector<FeasibilityEnvironment> parse_envs(const ExperimentConfig& cfg) {
  if (cfg.env.is_null()) throw ConfigError("this experiment needs --env");
  std::vector<FeasibilityEnvironment> out;
  if (cfg.n_list.empty()) out.push_back(json_io::parse_environment(cfg.env));
  for (std::size_t n : cfg.n_list) out.push_back(json_io::parse_environment(cfg.env, n));
  return out;
}

inline std::string line(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

struct Context {
  const ExperimentConfig& cfg;
  csv::Writer& csv;
  std::ostream& log;
  bool all_ok = true;

  void emit(const csv::Row& r, const std::string& summary) {
    csv.row(r);
    all_ok = all_ok && r.bound_satisfied;
    log << summary << (r.bound_satisfied ? "" : "  FAILED") << '\n';
  }
};

inline void run_classify(Context& ctx) {
  const double c = require_c(ctx.cfg);
  for (const auto& j : ctx.cfg.dists) {
    const auto d = json_io::parse_distribution(j);
    const auto r = classify(d, c);
    ctx.csv.classify_row(d.name(), r);
    ctx.log << line("classify %s c=%g: regular=%d hyper_regular=%d mhr=%d c_bounded=%d strongly=%d rho=%.6g mean=%.6g",
                    std::string(d.name()).c_str(), c, r.regular, r.hyper_regular, r.mhr, r.c_bounded,
                    r.strongly_c_bounded, r.rho, r.mean)
            << '\n';
  }
}

inline void run_ratio(Context& ctx, bool audit) {
  const auto& cfg = ctx.cfg;
  const auto mech = parse_mechanism(cfg.mechanism);
  const auto dists = parse_dists(cfg);
  if (audit) require_c(cfg);
  for (auto& env : parse_envs(cfg)) {
    const bool exact = env.is<PublicProject>() && env.size() <= 2 && mech == MechanismId::Optimal;
    const Market m(std::move(env), dists);
    RatioReport r;
    if (cfg.c) {
      r = bound_audit(m, *cfg.c, cfg.samples, cfg.seed, mech);
    } else {
      r = estimate_revenue_welfare(m, mech, cfg.samples, cfg.seed);
      r.hypothesis = "none";
      r.hypothesis_met = false;
    }
    const char* name = audit ? "audit" : "ratio";
    ctx.emit(csv::from_report(name, r, cfg.seed, cfg.samples),
             line("%s n=%zu %s: revenue=%.6g welfare=%.6g ratio=%.6g (se %.2g) bound=%.6g [%s]", name, r.n,
                  r.mechanism.c_str(), r.revenue.mean, r.welfare.mean, r.ratio, r.ratio_se, r.bound,
                  r.hypothesis.c_str()));
    if (exact) {
      const auto e = public_project_exact(m);
      csv::Row row{std::string(name) + "_exact", m.size(), r.c, r.mechanism, e.revenue, 0.0, e.welfare, 0.0,
                   e.ratio, r.bound, e.ratio >= r.bound - 1e-9, 0, 0};
      ctx.emit(row, line("%s_exact n=%zu: revenue=%.10g welfare=%.10g ratio=%.10g", name, m.size(), e.revenue,
                         e.welfare, e.ratio));
    }
  }
}

inline void run_asymptotics(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<std::size_t> ns = cfg.n_list.empty() ? std::vector<std::size_t>{1, 2, 100, 10000} : cfg.n_list;
  const auto d = cfg.dists.empty() ? Distribution::uniform(0.0, 1.0) : json_io::parse_distribution(cfg.dists.front());
  const double limit = public_project_limit();
  for (std::size_t n : ns) {
    if (n == 0 || n > 1'000'000) throw ConfigError("asymptotics needs 1 <= n <= 1e6");
    const auto r = public_project_ratio(d, n, cfg.samples, cfg.seed);
    const double root_n = std::sqrt(static_cast<double>(n));
    // the bound column carries the asymptotic reference ratio, not a guarantee
    csv::Row row = csv::from_report("asymptotics", r, cfg.seed, cfg.samples);
    row.c = std::nan("");
    row.bound = limit / root_n;
    row.bound_satisfied = true;
    ctx.emit(row, line("asymptotics n=%zu: ratio=%.6g ratio*sqrt(n)=%.6g (se %.2g) reference %.6g", n, r.ratio,
                       r.ratio * root_n, r.ratio_se * root_n, limit));
  }
}

inline void run_counterexample(Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<std::size_t> ns = cfg.n_list.empty() ? std::vector<std::size_t>{1, 10, 100, 1000} : cfg.n_list;
  const auto rows = counterexample_curve(ns, cfg.samples, cfg.seed);
  for (const auto& r : rows) {
    auto row = csv::from_report("counterexample", r.report, cfg.seed, cfg.samples);
    row.c = std::nan("");
    ctx.emit(row, line("counterexample n=%zu: ratio=%.6g (se %.2g) upper bound %.6g", r.n, r.report.ratio,
                       r.report.ratio_se, r.report.bound));
    csv::Row exact{"counterexample_exact", r.n,   std::nan(""), "optimal", r.exact.revenue, 0.0, r.exact.welfare,
                   0.0,                    r.exact.ratio, r.report.bound,
                   std::isnan(r.report.bound) || r.exact.ratio <= r.report.bound, 0, 0};
    ctx.emit(exact, line("counterexample_exact n=%zu: revenue=%.10g welfare=%.10g ratio=%.10g", r.n, r.exact.revenue,
                         r.exact.welfare, r.exact.ratio));
  }
  // strict decrease between consecutive n, beyond 3 combined standard errors
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const auto& a = rows[k].report;
    const auto& b = rows[k + 1].report;
    const double se = std::hypot(a.ratio_se, b.ratio_se);
    csv::Row row{"counterexample_trend", b.n, std::nan(""), "optimal", a.ratio, a.ratio_se, b.ratio, b.ratio_se,
                 a.ratio / b.ratio, 1.0, a.ratio - b.ratio > 3.0 * se, cfg.seed, cfg.samples};
    ctx.emit(row, line("counterexample_trend n=%zu->%zu: %.6g -> %.6g", a.n, b.n, a.ratio, b.ratio));
  }
}

inline std::vector<RandomVariableModel> repeat(const RandomVariableModel& m, std::size_t n) {
  return std::vector<RandomVariableModel>(n, m);
}

inline void emit_relation(Context& ctx, const std::string& label, const RandomVariableModel& x) {
  const auto rc = mdm_md_relation_check(x, ctx.cfg.seed);
  csv::Row row{"anticoncentration", 1, std::nan(""), "mdm_md_relation", rc.stats.md, 0.0, rc.stats.mdm, 0.0,
               rc.stats.mdm > 0 ? rc.stats.md / rc.stats.mdm : std::nan(""), 1.0, rc.ok(), ctx.cfg.seed, 0};
  ctx.emit(row, line("mdm_md_relation %s: MD=%.6g MDM=%.6g shift error %.2g", label.c_str(), rc.stats.md,
                     rc.stats.mdm, rc.worst_shift_error));
}

inline void emit_interval(Context& ctx, const std::vector<double>& xs, double a) {
  const auto ic = interval_count_check(xs, a);
  csv::Row row{"anticoncentration",  xs.size(), std::nan(""), "interval_count", static_cast<double>(ic.bound), 0.0,
               static_cast<double>(ic.count), 0.0, ic.count ? static_cast<double>(ic.bound) / static_cast<double>(ic.count) : std::nan(""),
               1.0, ic.ok(), ctx.cfg.seed, 0};
  ctx.emit(row, line("interval_count n=%zu (%g,%g]: count %llu <= %llu", xs.size(), a, a + 2.0,
                     static_cast<unsigned long long>(ic.count), static_cast<unsigned long long>(ic.bound)));
}

inline void emit_positive_part(Context& ctx, const std::string& label, const std::vector<RandomVariableModel>& ys) {
  const auto rep = positive_part_bound_check(ys, ctx.cfg.samples, ctx.cfg.seed);
  for (const auto* c : {&rep.mdm_sum, &rep.mean_zero, &rep.positive_mean}) {
    auto row = csv::from_check("anticoncentration", ys.size(), *c, ctx.cfg.seed);
    if (c->skipped) row.mechanism += ":skipped";
    ctx.emit(row, line("%s %s: lhs=%.6g (se %.2g) rhs=%.6g%s%s", c->name.c_str(), label.c_str(), c->lhs,
                       c->std_error, c->rhs, c->skipped ? " skipped: " : "", c->note.c_str()));
  }
}

inline void run_anticoncentration(Context& ctx) {
  const auto& x = ctx.cfg.extra;
  const bool custom = x.contains("models") || x.contains("values");
  if (x.contains("models")) {
    std::vector<RandomVariableModel> ys;
    for (const auto& m : x.at("models")) ys.push_back(json_io::parse_model(m));
    for (std::size_t i = 0; i < ys.size(); ++i) emit_relation(ctx, "model " + std::to_string(i + 1), ys[i]);
    emit_positive_part(ctx, "models", ys);
  }
  if (x.contains("values")) {
    const double a = x.value("interval", -1.0);
    emit_interval(ctx, x.at("values").get<std::vector<double>>(), a);
  }
  if (custom) return;

  // the documented instances
  const RandomVariableModel rad = FiniteModel::rademacher();
  emit_relation(ctx, "rademacher", rad);
  emit_relation(ctx, "atoms {0:0.9, 10:0.1}", FiniteModel({{0.0, 0.9}, {10.0, 0.1}}));
  emit_relation(ctx, "uniform(0,1)", AnalyticModel{Distribution::uniform(0.0, 1.0)});
  emit_interval(ctx, {1, 1, 1, 1}, -1.0);
  emit_interval(ctx, {1, 1.5, 3}, -1.0);
  emit_interval(ctx, {1}, 0.0);
  emit_positive_part(ctx, "100 rademacher", repeat(rad, 100));
  emit_positive_part(ctx, "25 uniform(-1,1)", repeat(AnalyticModel{Distribution::uniform(0.0, 1.0), -1.0, 2.0}, 25));
  emit_positive_part(ctx, "uniform(-0.9,1.1)", repeat(AnalyticModel{Distribution::uniform(0.0, 1.0), -0.9, 2.0}, 1));
}

inline void run_chebyshev(Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (!cfg.env.is_null()) {
    const double c = require_c(cfg);
    const auto dists = parse_dists(cfg);
    for (auto& env : parse_envs(cfg)) {
      const Market m(std::move(env), dists);
      const auto a = hyper_regular_audit(m, c, cfg.samples, cfg.seed);
      if (a.skipped) {
        csv::Row row{"hyper_regular_audit", m.size(), c, "skipped", 0, 0, 0, 0, std::nan(""), 1.0, true, cfg.seed, 0};
        ctx.emit(row, "hyper_regular_audit n=" + std::to_string(m.size()) + " skipped: " + a.reason);
        continue;
      }
      for (std::size_t i = 0; i < a.agents.size(); ++i) {
        const auto& ag = a.agents[i];
        csv::Row row{"hyper_regular_audit", m.size(), c, "agent" + std::to_string(i + 1), ag.virtual_part.mean,
                     ag.virtual_part.std_error, ag.value_part.mean, ag.value_part.std_error,
                     ag.virtual_part.mean / ag.value_part.mean, 1.0, ag.ok() && ag.g_monotone, cfg.seed, cfg.samples};
        ctx.emit(row, line("hyper_regular_audit agent %zu: E[phi+ 1opt]=%.6g E[v 1opt]/c=%.6g g monotone=%d", i + 1,
                           ag.virtual_part.mean, ag.value_part.mean, ag.g_monotone));
      }
      csv::Row row{"hyper_regular_audit", m.size(), c, "all", a.virtual_total.mean, a.virtual_total.std_error,
                   a.value_total.mean, a.value_total.std_error, a.virtual_total.mean / a.value_total.mean, 1.0,
                   a.ok(), cfg.seed, cfg.samples};
      ctx.emit(row, line("hyper_regular_audit all: E[phi+(opt)]=%.6g E[v(opt)]/c=%.6g", a.virtual_total.mean,
                         a.value_total.mean));
    }
    return;
  }

  auto emit = [&](const char* label, const ChebyshevResult& r) {
    csv::Row row{"chebyshev", 1, std::nan(""), label, r.lhs, 0.0, r.rhs, 0.0, r.rhs != 0 ? r.lhs / r.rhs : std::nan(""),
                 1.0, r.ok, cfg.seed, 0};
    ctx.emit(row, line("chebyshev %s: lhs=%.10g rhs=%.10g", label, r.lhs, r.rhs));
  };
  const auto unif = AnalyticModel{Distribution::uniform(0.0, 1.0)};
  auto id = [](double v) { return v; };
  auto one = [](double) { return 1.0; };
  emit("identity_moments", weighted_ratio_inequality({id, id, one, unif, {}}));
  emit("constant_f", weighted_ratio_inequality({[](double) { return 3.0; }, id, one, unif, {}}));
  const double step = cfg.extra.value("step", 0.7);
  auto phi_plus_over_x = [](double v) { return v <= 0.0 ? 0.0 : std::max(0.0, 2.0 * v - 1.0) / v; };
  auto g_step = [step](double v) { return v < step ? 0.0 : 1.0; };
  emit("phi_plus_over_x", weighted_ratio_inequality({phi_plus_over_x, g_step, id, unif, {0.5, step}}));

  const auto n_triples = cfg.extra.value("triples", std::uint64_t{1000});
  CounterEngine rng(cfg.seed, 0);
  std::uint64_t passed = 0;
  for (std::uint64_t k = 0; k < n_triples; ++k) passed += weighted_ratio_inequality(random_monotone_triple(rng)).ok;
  csv::Row row{"chebyshev", 1, std::nan(""), "random_triples", static_cast<double>(passed), 0.0,
               static_cast<double>(n_triples), 0.0,
               n_triples ? static_cast<double>(passed) / static_cast<double>(n_triples) : std::nan(""), 1.0,
               passed == n_triples, cfg.seed, n_triples};
  ctx.emit(row, line("chebyshev random triples: %llu of %llu pass", static_cast<unsigned long long>(passed),
                     static_cast<unsigned long long>(n_triples)));
}

}  // namespace detail

/// Runs one experiment, writing CSV to `csv_out` and one summary line per
/// row to `log`. Returns the process exit code.
inline int run(const ExperimentConfig& cfg, std::ostream& csv_out, std::ostream& log) {
  try {
    csv::Writer writer(csv_out);
    writer.comment("config: " + cfg.to_json().dump());
    writer.comment("tail: unbounded distributions are sampled at survival >= 1e-9");
    writer.header(cfg.experiment == "classify" ? csv::kClassifyHeader : csv::kHeader);
    detail::Context ctx{cfg, writer, log};
    const auto& e = cfg.experiment;
    if (e == "classify") detail::run_classify(ctx);
    else if (e == "ratio") detail::run_ratio(ctx, false);
    else if (e == "audit") detail::run_ratio(ctx, true);
    else if (e == "asymptotics") detail::run_asymptotics(ctx);
    else if (e == "counterexample") detail::run_counterexample(ctx);
    else if (e == "anticoncentration") detail::run_anticoncentration(ctx);
    else if (e == "chebyshev") detail::run_chebyshev(ctx);
    else throw ConfigError("unknown experiment '" + e + "'");
    return ctx.all_ok ? kPass : kFailedCheck;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const InfiniteMean& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

/// Command-line front end: `revwel <experiment> [flags]`.
inline int main(int argc, const char* const* argv, std::ostream& log = std::cerr) {
  CLI::App app{"Revenue-to-welfare experiments for single-parameter auctions"};
  app.require_subcommand(1);
  ExperimentConfig cfg;
  std::string config_file, dist, dists, env, n_list, mechanism, out;
  std::optional<double> c;
  std::optional<std::uint64_t> samples, seed;
  for (const auto& id : experiments()) {
    auto* sub = app.add_subcommand(id);
    sub->add_option("--config", config_file, "JSON experiment config");
    sub->add_option("--dist", dist, "distribution JSON, replicated to every agent");
    sub->add_option("--dists", dists, "JSON list of per-agent distributions");
    sub->add_option("--env", env, "environment JSON");
    sub->add_option("--c", c, "boundedness constant c");
    sub->add_option("--n", n_list, "comma-separated agent counts");
    sub->add_option("--samples", samples, "Monte Carlo samples");
    sub->add_option("--seed", seed, "RNG seed (default 42)");
    sub->add_option("--out", out, "CSV output file (default stdout)");
    sub->add_option("--mechanism", mechanism, "efficient | optimal | vcg_l");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) throw ConfigError("cannot read " + config_file);
      merge_config(cfg, Json::parse(in));
    }
    cfg.experiment = app.get_subcommands().front()->get_name();
    if (!dist.empty()) cfg.dists = {Json::parse(dist)};
    if (!dists.empty()) cfg.dists = Json::parse(dists).get<std::vector<Json>>();
    if (!env.empty()) cfg.env = Json::parse(env);
    if (c) cfg.c = *c;
    if (!n_list.empty()) {
      cfg.n_list.clear();
      std::stringstream ss(n_list);
      for (std::string item; std::getline(ss, item, ',');) {
        std::size_t used = 0;
        const long long v = std::stoll(item, &used);
        if (used != item.size() || v < 1) throw ConfigError("--n takes positive integers");
        cfg.n_list.push_back(static_cast<std::size_t>(v));
      }
    }
    if (samples) cfg.samples = *samples;
    if (seed) cfg.seed = *seed;
    if (!mechanism.empty()) cfg.mechanism = mechanism;
    if (!out.empty()) cfg.out = out;
  } catch (const std::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  if (cfg.out.empty()) return run(cfg, std::cout, log);
  std::ofstream file(cfg.out);
  if (!file) {
    log << "config error: cannot write " << cfg.out << '\n';
    return kConfigError;
  }
  return run(cfg, file, log);
}

}  // namespace revwel::cli
