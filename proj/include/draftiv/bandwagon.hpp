#pragma once

#include <string>
#include <vector>

#include "draftiv/estimators.hpp"
#include "draftiv/hdfe.hpp"
#include "draftiv/instruments.hpp"

namespace draftiv {

// One pooled band contrast: low positions are the control arm, high
// positions the treated arm, estimated as a binary-treatment 2SLS with the
// leave-one-out instrument.
struct BandComparison {
  BandPair pair;
  std::string label;
  bool feasible = false;
  std::string note;  // set when infeasible
  double estimate = 0;
  double se = 0;
  double ci_low = 0;
  double ci_high = 0;
  double pval = 0;
  double pct_change = 0;  // (e^estimate - 1) * 100
  double first_stage_f = 0;
  long n_obs = 0;
  long n_control = 0;
  long n_treated = 0;
};

struct BandwagonOptions {
  OutcomeSpec outcome;
  std::vector<FactorKind> absorb = {FactorKind::Athlete, FactorKind::Event};
  CovarianceSpec cov;
  std::string instrument = "z_loo";
  GroupSizePredicate group_size;  // "any" keeps every grouped row
  double ci_level = 0.95;
  int threads = 1;
  EstimationOptions estimation;
};

// The familiar seven-step ladder (1-2 vs 3-4) .. (7-8 vs 9-10).
std::vector<BandPair> default_band_ladder();

// One comparison per input pair, same order. A pair whose arm dies in the
// filters comes back infeasible with a note; other failures propagate.
std::vector<BandComparison> run_band_comparisons(const Panel& panel,
                                                 const std::vector<BandPair>& pairs,
                                                 const BandwagonOptions& options);

struct FigureRow {
  std::string label;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
  double pct_change = 0;
  bool significant = false;
};

// Plot-ready rows; significant_only keeps p < alpha, infeasible rows never
// appear.
std::vector<FigureRow> emit_figure_data(const std::vector<BandComparison>& comparisons,
                                        double alpha = 0.05,
                                        bool significant_only = true);

void write_band_table(const std::string& path,
                      const std::vector<BandComparison>& comparisons,
                      const std::string& comment = "");
void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows,
                      const std::string& comment = "");

}  // namespace draftiv
