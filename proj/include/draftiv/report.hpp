#pragma once

#include <string>
#include <vector>

#include "draftiv/estimators.hpp"
#include "draftiv/panel.hpp"

namespace draftiv {

struct NumericSummary {
  std::string column;
  long n = 0;  // non-missing values
  double min = 0, q1 = 0, median = 0, mean = 0, q3 = 0, max = 0;
};

// Five-number summary plus mean for each numeric panel column, missing
// values excluded.
std::vector<NumericSummary> summary_stats(const Panel& panel);

struct BalanceRow {
  EventCategory category = EventCategory::Sprint;
  Period period = Period::Pre;
  long n = 0;
  double mean_swim = 0;
  double sd_swim = 0;
};

// Swim-out mean/SD/count per (category, period) cell, fixed enum order,
// empty cells omitted.
std::vector<BalanceRow> balance_by_category_period(const Panel& panel);

void write_summary_csv(const std::string& path,
                       const std::vector<NumericSummary>& rows,
                       const std::string& comment = "");
void write_balance_csv(const std::string& path, const std::vector<BalanceRow>& rows,
                       const std::string& comment = "");

// One estimation under a stable name, as referenced by table layouts.
struct NamedResult {
  std::string name;
  bool is_iv = false;
  RegressionResult reg;  // the second stage when is_iv
  FirstStage first;      // meaningful when is_iv
  double wu_hausman_p = 0;
  bool wu_hausman_degenerate = false;
  std::string formula_text;
};

NamedResult named_ols(const std::string& name, const RegressionResult& r,
                      const std::string& formula_text = "");
NamedResult named_iv(const std::string& name, const IVResult& r,
                     const std::string& formula_text = "");

// Star thresholds differ between published table styles, so they are a
// layout option: Coarse = *** 0.01 / ** 0.05 / * 0.1, Fine = *** 0.001 /
// ** 0.01 / * 0.05.
enum class StarConvention { Coarse, Fine };

std::string star_marker(double pval, StarConvention convention);

struct TableLayout {
  std::string title;
  std::vector<std::string> columns;    // spec names; empty = all, given order
  std::vector<std::string> coef_rows;  // coefficient names; empty = first-seen union
  StarConvention stars = StarConvention::Coarse;
  bool diagnostics = true;
};

enum class TableFormat { Csv, Markdown };

// Coefficient cells "b*** (se)", one column per specification, diagnostics
// block underneath. Deterministic byte-for-byte given identical inputs.
std::string render_table(const std::vector<NamedResult>& results,
                         const TableLayout& layout, TableFormat format);

void emit_table(const std::string& path, const std::vector<NamedResult>& results,
                const TableLayout& layout, TableFormat format);

}  // namespace draftiv
