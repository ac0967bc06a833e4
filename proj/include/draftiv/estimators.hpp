#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "draftiv/hdfe.hpp"

namespace draftiv {

enum class CovVariant { Iid, Hc1, Cluster, TwoWay };

std::string to_string(CovVariant v);

// Covariance request: "iid", "hc1", "cluster:<factor>", "twoway:<f1>,<f2>".
// "cluster" without a factor falls back to the formula's cluster clause.
// Factor names: athlete, event, group, eventgroup.
struct CovarianceSpec {
  CovVariant variant = CovVariant::Iid;
  std::vector<std::string> cluster_names;
  bool cr1 = true;  // small-sample factor (G/(G-1)) * ((n-1)/dof)

  static CovarianceSpec parse(const std::string& text);
  std::string str() const;
};

struct CoefTable {
  std::vector<std::string> names;
  Eigen::VectorXd coef;
  Eigen::VectorXd se;
  Eigen::VectorXd tstat;
  Eigen::VectorXd pval;

  int find(const std::string& name) const;  // -1 when absent
};

struct FitStats {
  long n = 0;
  long k = 0;              // slope columns, intercept included when present
  long rank_absorbed = 0;  // rank of the absorbed dummy span
  long dof_resid = 0;
  double rmse = 0;
  double r2 = 0;
  double adj_r2 = 0;
  double within_r2 = 0;
  double rss = 0;
  double tss_raw = 0;
  double tss_within = 0;
};

struct RegressionResult {
  CoefTable coefs;
  FitStats stats;
  CovarianceSpec cov;
  double t_dof = 0;                  // dof behind the reported p-values
  std::vector<std::string> cluster_names;  // resolved covariance clusters
  std::vector<long> cluster_counts;
  std::map<std::string, long> absorbed_levels;
  long absorb_iterations = 0;
  std::vector<std::string> warnings;
  DesignAudit audit;
};

struct FirstStage {
  CoefTable coefs;  // excluded instruments first, then exogenous slopes
  double f_excluded = 0;
  double f_p = 0;
  bool weak = false;
};

struct IVResult {
  RegressionResult second;  // endogenous coefficient first
  FirstStage first;
  double wu_hausman = 0;  // F form; t^2 of the control-function residual
  double wu_hausman_p = 0;
  bool wu_hausman_degenerate = false;
};

struct EstimationOptions {
  double within_tol = 1e-10;
  long within_max_iter = 10000;
  double weak_f_threshold = 10.0;
};

// Least squares of the design's outcome on its exogenous columns after
// absorbing the fixed effects (an intercept is added when nothing is
// absorbed). Throws naming the collinear set on rank deficiency.
RegressionResult ols(const DesignMatrices& design, const CovarianceSpec& cov,
                     const EstimationOptions& options = {});

// Two-stage least squares for one endogenous column. Residuals and fit
// statistics use the original endogenous column, not its first-stage fit.
IVResult tsls(const DesignMatrices& design, const CovarianceSpec& cov,
              const EstimationOptions& options = {});

// Percent change of the outcome implied by a unit change of the regressor
// under a log outcome: (e^beta - 1) * 100.
double semi_elasticity(double beta);

}  // namespace draftiv
