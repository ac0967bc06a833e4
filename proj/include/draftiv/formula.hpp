#pragma once

#include <optional>
#include <string>
#include <vector>

#include "draftiv/grouping.hpp"
#include "draftiv/instruments.hpp"

namespace draftiv {

enum class FactorKind { Athlete, Event, Group, EventGroup };

std::string to_string(FactorKind f);

enum class OutcomeMode { LogRankPlus1, CenteredLog, Raw };

// y = ln(rank + 1), or the event-centered variant ln(rank - mean + shift_c)
// with non-positive arguments dropped and counted. Raw passes the response
// column through untouched; it is the inferred mode when a formula's
// response names an ordinary panel column and no outcome clause appears.
struct OutcomeSpec {
  OutcomeMode mode = OutcomeMode::LogRankPlus1;
  double shift_c = 1.0;
  std::optional<double> rank_cap;  // keep rows with rank < cap
  bool explicit_mode = false;      // an outcome clause was written
};

// One regressor: a column, or the product of two columns.
struct Term {
  std::string a;
  std::string b;  // empty unless an interaction a:b

  std::string name() const { return b.empty() ? a : a + ":" + b; }
};

struct FormulaFilters {
  GroupSizePredicate group_size;
  int position_cap = 0;             // dcap=N replaces D by min(D, N)
  std::optional<BandPair> band;     // rows outside both bands leave the sample
  bool drop_leader_term = false;    // "noleader"
};

// Declarative description of one estimation: outcome, regressors, optional
// endogenous term with instruments, absorbed factors, cluster factors,
// sample filters.
struct FormulaSpec {
  std::string response;  // "y" for the built outcome, else a panel column
  OutcomeSpec outcome;
  std::vector<Term> terms;
  std::optional<std::string> endogenous;   // column name (D or B, or treat)
  std::vector<std::string> instruments;    // column names (z_loo, z_proj)
  std::vector<FactorKind> absorb;
  std::vector<FactorKind> cluster;
  FormulaFilters filters;
  std::string text;  // original formula text

  void validate() const;  // endogenous iff instruments, FE non-empty for FE runs
};

// Parses e.g.
//   y ~ age + age_sq + pre:drafter | fe: athlete event group
//     | iv: D ~ z_loo | cluster: event | filter: groupsize<10, rankcap=250
//     | outcome: centered shift=5
// Errors carry 1-based line and column of the offending token.
FormulaSpec parse_formula(const std::string& text);

struct FormulaError : std::runtime_error {
  int line;
  int column;
  FormulaError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                           std::to_string(col_) + ")"),
        line(line_),
        column(col_) {}
};

}  // namespace draftiv
