#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "draftiv/formula.hpp"
#include "draftiv/panel.hpp"

namespace draftiv {

struct DesignOptions {
  // Meaning of the "cluster_swim_group" regressor: numeric group index by
  // default, group size behind the switch.
  enum class ClusterRegressor { Index, Size } cluster_regressor = ClusterRegressor::Index;
  // When set, "fe: group" is keyed by (event, group) pairs instead of the
  // pooled within-event index.
  bool group_fe_event_keyed = false;
  GameParams benefit_params{};  // used when dcap recomputes the benefit column
};

// Numeric value of a named panel column (aliases: D=position, S=swim_out_s,
// B=benefit, Z=z_loo). NaN marks a value that is not available for the row.
double resolve_column(const PanelRow& row, const std::string& name,
                      const DesignOptions& options);
bool is_known_column(const std::string& name);

struct DesignAudit {
  long input = 0;
  long dropped_group_size = 0;
  long dropped_band = 0;
  long dropped_rank_cap = 0;
  long dropped_nonpositive_log = 0;
  long dropped_missing = 0;  // NaN in a used column, e.g. singleton instrument
  long output = 0;

  long total_dropped() const {
    return dropped_group_size + dropped_band + dropped_rank_cap +
           dropped_nonpositive_log + dropped_missing;
  }
};

// A dense-encoded categorical factor on the estimation sample.
struct FactorColumn {
  std::string name;
  std::vector<int> ids;  // 0..levels-1 per row
  int levels = 0;
};

// Assembled estimation input: outcome, regressor matrix, optional endogenous
// column and excluded instruments, factor encodings for absorption and for
// covariance clustering.
struct DesignMatrices {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;           // exogenous slope columns
  Eigen::VectorXd x_endog;     // size 0 when the formula has no iv clause
  Eigen::MatrixXd z_excluded;  // 0 columns when not instrumented
  std::vector<std::string> x_names;
  std::string endog_name;
  std::vector<std::string> z_names;

  std::vector<FactorColumn> absorb;       // in formula order
  std::vector<FactorColumn> cluster;      // formula cluster clause
  std::map<std::string, FactorColumn> factor_pool;  // athlete/event/group/eventgroup

  DesignAudit audit;

  long n() const { return y.size(); }
  bool has_endog() const { return x_endog.size() > 0; }
};

struct OutcomeAudit {
  long input = 0;
  long dropped_rank_cap = 0;
  long dropped_nonpositive_log = 0;
  long output = 0;
};

// Outcome transform for one panel subset. log_rank_plus1: y = ln(rank+1).
// centered: y = ln(rank - event_mean + shift_c), rows with a non-positive
// argument dropped and counted. keep[i] marks surviving rows.
OutcomeAudit build_outcome(const std::vector<const PanelRow*>& rows,
                           const OutcomeSpec& spec, std::vector<double>& y,
                           std::vector<char>& keep);

struct WithinResult {
  long iterations = 0;
  double final_delta = 0.0;
};

// Alternating projections: cycles through the factors subtracting group
// means until the largest absolute change of any entry over a full cycle
// drops below tol. Throws naming the worst column on non-convergence.
WithinResult within_transform(Eigen::MatrixXd& m,
                              const std::vector<FactorColumn>& factors,
                              double tol = 1e-10, long max_iter = 10000,
                              const std::vector<std::string>* column_names = nullptr);

// Rank of the absorbed dummy span. With two or more factors the redundancy
// between the first two is counted exactly via connected components.
struct AbsorptionRank {
  long levels_total = 0;
  long rank = 0;
  long components = 0;  // between factors 1 and 2; 0 when fewer than 2 factors
};
AbsorptionRank absorption_rank(const std::vector<FactorColumn>& factors);

// Applies the formula's sample filters, builds the outcome and all columns,
// and encodes factors. Throws on an empty final sample or on duplicate
// regressor columns.
DesignMatrices build_design(const Panel& panel, const FormulaSpec& formula,
                            const DesignOptions& options = {});

}  // namespace draftiv
