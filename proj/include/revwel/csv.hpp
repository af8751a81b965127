#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "revwel/anticonc.hpp"
#include "revwel/classify.hpp"
#include "revwel/sim.hpp"

namespace revwel::csv {

constexpr std::string_view kHeader =
    "experiment,n,c,mechanism,revenue,rev_se,welfare,wel_se,ratio,bound,bound_satisfied,seed,samples";

constexpr std::string_view kClassifyHeader =
    "experiment,dist,c,regular,hyper_regular,mhr,c_bounded,strongly_c_bounded,mean,rho,monopoly_price";

/// One row of the shared result schema. Inequality checks put the larger
/// side in `revenue`, the smaller in `welfare`, and bound = 1 on their ratio.
struct Row {
  std::string experiment;
  std::size_t n = 0;
  double c = 0.0;
  std::string mechanism;
  double revenue = 0.0;
  double rev_se = 0.0;
  double welfare = 0.0;
  double wel_se = 0.0;
  double ratio = 0.0;
  double bound = 0.0;
  bool bound_satisfied = true;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
};

inline std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline const char* fmt(bool b) { return b ? "true" : "false"; }

inline Row from_report(std::string experiment, const RatioReport& r, std::uint64_t seed, std::uint64_t samples) {
  return {std::move(experiment), r.n,           r.c,     r.mechanism,        r.revenue.mean, r.revenue.std_error,
          r.welfare.mean,        r.welfare.std_error,     r.ratio, r.bound, r.bound_satisfied, seed, samples};
}

inline Row from_check(std::string experiment, std::size_t n, const InequalityCheck& c, std::uint64_t seed) {
  Row r;
  r.experiment = std::move(experiment);
  r.n = n;
  r.c = std::nan("");
  r.mechanism = c.name;
  r.revenue = c.lhs;
  r.rev_se = c.std_error;
  r.welfare = c.rhs;
  r.ratio = c.rhs != 0.0 ? c.lhs / c.rhs : std::nan("");
  r.bound = 1.0;
  r.bound_satisfied = c.ok();
  r.seed = seed;
  r.samples = c.samples;
  return r;
}

class Writer {
public:
  explicit Writer(std::ostream& out) : out_(out) {}

  /// "# key: value" metadata line, written before the header.
  void comment(std::string_view text) {
    std::istringstream lines{std::string(text)};
    for (std::string line; std::getline(lines, line);) out_ << "# " << line << '\n';
  }

  void header(std::string_view h = kHeader) { out_ << h << '\n'; }

  void row(const Row& r) {
    out_ << r.experiment << ',' << r.n << ',' << fmt(r.c) << ',' << r.mechanism << ',' << fmt(r.revenue) << ','
         << fmt(r.rev_se) << ',' << fmt(r.welfare) << ',' << fmt(r.wel_se) << ',' << fmt(r.ratio) << ','
         << fmt(r.bound) << ',' << fmt(r.bound_satisfied) << ',' << r.seed << ',' << r.samples << '\n';
  }

  void classify_row(std::string_view dist, const ClassificationReport& c) {
    out_ << "classify," << dist << ',' << fmt(c.c) << ',' << fmt(c.regular) << ',' << fmt(c.hyper_regular) << ','
         << fmt(c.mhr) << ',' << fmt(c.c_bounded) << ',' << fmt(c.strongly_c_bounded) << ',' << fmt(c.mean) << ','
         << fmt(c.rho) << ',' << fmt(c.monopoly_price) << '\n';
  }

private:
  std::ostream& out_;
};

}  // namespace revwel::csv
