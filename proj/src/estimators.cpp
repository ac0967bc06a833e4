#include "draftiv/estimators.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "draftiv/stats.hpp"

namespace draftiv {

namespace {
const double kNan = std::numeric_limits<double>::quiet_NaN();
}

std::string to_string(CovVariant v) {
  switch (v) {
    case CovVariant::Iid:
      return "iid";
    case CovVariant::Hc1:
      return "hc1";
    case CovVariant::Cluster:
      return "cluster";
    case CovVariant::TwoWay:
      return "twoway";
  }
  return "?";
}

CovarianceSpec CovarianceSpec::parse(const std::string& text) {
  CovarianceSpec spec;
  std::string head = text;
  std::string tail;
  auto colon = text.find(':');
  if (colon != std::string::npos) {
    head = text.substr(0, colon);
    tail = text.substr(colon + 1);
  }
  if (head == "iid") {
    spec.variant = CovVariant::Iid;
  } else if (head == "hc1" || head == "robust") {
    spec.variant = CovVariant::Hc1;
  } else if (head == "cluster") {
    spec.variant = CovVariant::Cluster;
  } else if (head == "twoway") {
    spec.variant = CovVariant::TwoWay;
  } else {
    throw std::invalid_argument("unknown covariance '" + text +
                                "' (iid, hc1, cluster:<f>, twoway:<f1>,<f2>)");
  }
  if (!tail.empty()) {
    std::stringstream ss(tail);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!item.empty()) spec.cluster_names.push_back(item);
    }
  }
  if (spec.variant == CovVariant::TwoWay && !spec.cluster_names.empty() &&
      spec.cluster_names.size() != 2)
    throw std::invalid_argument("twoway covariance takes exactly two factors");
  if (spec.variant == CovVariant::Cluster && spec.cluster_names.size() > 1)
    throw std::invalid_argument("cluster covariance takes one factor");
  if ((spec.variant == CovVariant::Iid || spec.variant == CovVariant::Hc1) &&
      !spec.cluster_names.empty())
    throw std::invalid_argument(head + " covariance takes no cluster factor");
  return spec;
}

std::string CovarianceSpec::str() const {
  std::string s = to_string(variant);
  for (size_t i = 0; i < cluster_names.size(); ++i)
    s += (i == 0 ? ":" : ",") + cluster_names[i];
  return s;
}

int CoefTable::find(const std::string& name) const {
  for (size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<int>(i);
  return -1;
}

double semi_elasticity(double beta) { return (std::exp(beta) - 1.0) * 100.0; }

namespace {

struct Prepared {
  Eigen::VectorXd y;
  Eigen::MatrixXd X;  // exogenous slopes; includes "const" when nothing absorbed
  Eigen::VectorXd endog;
  Eigen::MatrixXd Z;
  std::vector<std::string> x_names;
  AbsorptionRank arank;
  long iterations = 0;
  double tss_raw = 0;
  double tss_within = 0;
};

Prepared prepare(const DesignMatrices& d, const EstimationOptions& opt) {
  const Eigen::Index n = d.y.size();
  const bool add_const = d.absorb.empty();
  const Eigen::Index k = d.X.cols() + (add_const ? 1 : 0);
  const Eigen::Index e = d.has_endog() ? 1 : 0;
  const Eigen::Index q = d.z_excluded.cols();
  if (k + e == 0) throw std::invalid_argument("no regressors in the design");

  Eigen::MatrixXd m(n, 1 + k + e + q);
  std::vector<std::string> names;
  m.col(0) = d.y;
  names.push_back("y");
  Eigen::Index c = 1;
  for (Eigen::Index j = 0; j < d.X.cols(); ++j) {
    m.col(c++) = d.X.col(j);
    names.push_back(d.x_names[static_cast<size_t>(j)]);
  }
  if (add_const) {
    m.col(c++).setOnes();
    names.push_back("const");
  }
  if (e) {
    m.col(c++) = d.x_endog;
    names.push_back(d.endog_name);
  }
  for (Eigen::Index j = 0; j < q; ++j) {
    m.col(c++) = d.z_excluded.col(j);
    names.push_back(d.z_names[static_cast<size_t>(j)]);
  }

  Prepared p;
  double ybar = d.y.mean();
  p.tss_raw = (d.y.array() - ybar).square().sum();

  if (!d.absorb.empty()) {
    WithinResult wr =
        within_transform(m, d.absorb, opt.within_tol, opt.within_max_iter, &names);
    p.iterations = wr.iterations;
  }
  p.arank = absorption_rank(d.absorb);

  p.y = m.col(0);
  double ywbar = p.y.mean();
  p.tss_within = (p.y.array() - ywbar).square().sum();
  p.X = m.middleCols(1, k);
  p.x_names.assign(names.begin() + 1, names.begin() + 1 + k);
  if (e) p.endog = m.col(1 + k);
  p.Z = m.middleCols(1 + k + e, q);
  return p;
}

void check_full_rank(const Eigen::MatrixXd& W, const std::vector<std::string>& names) {
  if (W.cols() == 0) return;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(W);
  qr.setThreshold(1e-7);
  if (qr.rank() < W.cols()) {
    const auto& perm = qr.colsPermutation().indices();
    std::string msg = "collinear regressor columns after absorption:";
    for (Eigen::Index j = qr.rank(); j < W.cols(); ++j)
      msg += " " + names[static_cast<size_t>(perm[j])];
    throw std::invalid_argument(msg);
  }
}

Eigen::MatrixXd gram_inverse(const Eigen::MatrixXd& W) {
  Eigen::MatrixXd g = W.transpose() * W;
  return g.completeOrthogonalDecomposition().pseudoInverse();
}

std::vector<FactorColumn> resolve_clusters(const DesignMatrices& d,
                                           const CovarianceSpec& cov) {
  if (cov.variant != CovVariant::Cluster && cov.variant != CovVariant::TwoWay)
    return {};
  size_t want = cov.variant == CovVariant::TwoWay ? 2 : 1;
  if (cov.cluster_names.empty()) {
    if (d.cluster.size() < want)
      throw std::invalid_argument(
          to_string(cov.variant) +
          " covariance needs " + std::to_string(want) +
          " cluster factor(s); the formula's cluster clause has " +
          std::to_string(d.cluster.size()));
    return {d.cluster.begin(), d.cluster.begin() + static_cast<long>(want)};
  }
  std::vector<FactorColumn> out;
  for (const auto& nm : cov.cluster_names) {
    auto it = d.factor_pool.find(nm);
    if (it == d.factor_pool.end())
      throw std::invalid_argument("cluster factor '" + nm +
                                  "' is not available on this sample");
    out.push_back(it->second);
  }
  return out;
}

Eigen::MatrixXd cluster_meat(const Eigen::MatrixXd& W, const Eigen::VectorXd& u,
                             const std::vector<int>& ids, int levels) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(levels, W.cols());
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    s.row(ids[static_cast<size_t>(i)]) += u[i] * W.row(i);
  return s.transpose() * s;
}

FactorColumn intersect_factors(const FactorColumn& a, const FactorColumn& b) {
  FactorColumn out;
  out.name = a.name + "&" + b.name;
  out.ids.reserve(a.ids.size());
  std::unordered_map<long long, int> seen;
  for (size_t i = 0; i < a.ids.size(); ++i) {
    long long key = static_cast<long long>(a.ids[i]) *
                        static_cast<long long>(b.levels) +
                    b.ids[i];
    auto [it, fresh] = seen.emplace(key, static_cast<int>(seen.size()));
    (void)fresh;
    out.ids.push_back(it->second);
  }
  out.levels = static_cast<int>(seen.size());
  return out;
}

struct CovOut {
  Eigen::MatrixXd V;
  double t_dof = 0;
  std::vector<std::string> cluster_names;
  std::vector<long> cluster_counts;
  std::vector<std::string> warnings;
};

Eigen::MatrixXd cr1_piece(const Eigen::MatrixXd& W, const Eigen::VectorXd& u,
                          const Eigen::MatrixXd& bread, long dof_resid,
                          const FactorColumn& f, bool cr1) {
  double g = static_cast<double>(f.levels);
  double n = static_cast<double>(W.rows());
  if (f.levels < 2)
    throw std::invalid_argument("cluster factor '" + f.name +
                                "' has fewer than two clusters");
  double c = cr1 ? (g / (g - 1.0)) * ((n - 1.0) / static_cast<double>(dof_resid))
                 : 1.0;
  return c * bread * cluster_meat(W, u, f.ids, f.levels) * bread;
}

CovOut covariance(const Eigen::MatrixXd& W, const Eigen::VectorXd& u,
                  const Eigen::MatrixXd& bread, long dof_resid,
                  const CovarianceSpec& cov,
                  const std::vector<FactorColumn>& clusters) {
  CovOut out;
  const double n = static_cast<double>(W.rows());
  switch (cov.variant) {
    case CovVariant::Iid: {
      double s2 = u.squaredNorm() / static_cast<double>(dof_resid);
      out.V = s2 * bread;
      out.t_dof = static_cast<double>(dof_resid);
      break;
    }
    case CovVariant::Hc1: {
      Eigen::MatrixXd meat =
          W.transpose() * u.cwiseProduct(u).asDiagonal() * W;
      out.V = bread * meat * bread * (n / static_cast<double>(dof_resid));
      out.t_dof = static_cast<double>(dof_resid);
      break;
    }
    case CovVariant::Cluster: {
      const FactorColumn& f = clusters.at(0);
      out.V = cr1_piece(W, u, bread, dof_resid, f, cov.cr1);
      out.t_dof = static_cast<double>(f.levels - 1);
      out.cluster_names.push_back(f.name);
      out.cluster_counts.push_back(f.levels);
      break;
    }
    case CovVariant::TwoWay: {
      const FactorColumn& f1 = clusters.at(0);
      const FactorColumn& f2 = clusters.at(1);
      FactorColumn f12 = intersect_factors(f1, f2);
      Eigen::MatrixXd v1 = cr1_piece(W, u, bread, dof_resid, f1, cov.cr1);
      Eigen::MatrixXd v2 = cr1_piece(W, u, bread, dof_resid, f2, cov.cr1);
      Eigen::MatrixXd v12 = f12.levels >= 2
                                ? cr1_piece(W, u, bread, dof_resid, f12, cov.cr1)
                                : Eigen::MatrixXd::Zero(bread.rows(), bread.cols());
      out.V = v1 + v2 - v12;
      out.t_dof = static_cast<double>(std::min(f1.levels, f2.levels) - 1);
      out.cluster_names = {f1.name, f2.name};
      out.cluster_counts = {f1.levels, f2.levels};
      if (out.V.diagonal().minCoeff() < 0)
        out.warnings.push_back(
            "two-way covariance produced a negative variance entry");
      break;
    }
  }
  return out;
}

CoefTable make_table(const std::vector<std::string>& names,
                     const Eigen::VectorXd& beta, const CovOut& co) {
  CoefTable t;
  t.names = names;
  t.coef = beta;
  const Eigen::Index k = beta.size();
  t.se.resize(k);
  t.tstat.resize(k);
  t.pval.resize(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    double v = co.V(j, j);
    t.se[j] = v >= 0 ? std::sqrt(v) : kNan;
    t.tstat[j] = t.se[j] > 0 ? beta[j] / t.se[j] : kNan;
    t.pval[j] = std::isnan(t.tstat[j]) ? kNan : t_two_sided_p(t.tstat[j], co.t_dof);
  }
  return t;
}

FitStats make_stats(const Prepared& p, double rss, long k) {
  FitStats s;
  s.n = p.y.size();
  s.k = k;
  s.rank_absorbed = p.arank.rank;
  s.dof_resid = s.n - s.rank_absorbed - k;
  s.rss = rss;
  s.tss_raw = p.tss_raw;
  s.tss_within = p.tss_within;
  s.rmse = std::sqrt(rss / static_cast<double>(s.n));
  s.r2 = p.tss_raw > 0 ? 1.0 - rss / p.tss_raw : kNan;
  s.adj_r2 = (p.tss_raw > 0 && s.dof_resid > 0)
                 ? 1.0 - (rss / static_cast<double>(s.dof_resid)) /
                             (p.tss_raw / static_cast<double>(s.n - 1))
                 : kNan;
  s.within_r2 = p.tss_within > 0 ? 1.0 - rss / p.tss_within : kNan;
  return s;
}

void fill_common(RegressionResult& r, const DesignMatrices& d, const Prepared& p,
                 const CovarianceSpec& cov, const CovOut& co) {
  r.cov = cov;
  r.t_dof = co.t_dof;
  r.cluster_names = co.cluster_names;
  r.cluster_counts = co.cluster_counts;
  for (const auto& f : d.absorb) r.absorbed_levels[f.name] = f.levels;
  r.absorb_iterations = p.iterations;
  r.audit = d.audit;
  for (const auto& w : co.warnings) r.warnings.push_back(w);
}

}  // namespace

RegressionResult ols(const DesignMatrices& design, const CovarianceSpec& cov,
                     const EstimationOptions& options) {
  if (design.has_endog())
    throw std::invalid_argument(
        "design carries an endogenous column; use tsls or drop the iv clause");
  Prepared p = prepare(design, options);
  const Eigen::Index k = p.X.cols();
  if (k == 0) throw std::invalid_argument("no regressors in the design");
  check_full_rank(p.X, p.x_names);

  Eigen::VectorXd beta = p.X.completeOrthogonalDecomposition().solve(p.y);
  Eigen::VectorXd u = p.y - p.X * beta;
  double rss = u.squaredNorm();

  RegressionResult r;
  r.stats = make_stats(p, rss, k);
  if (r.stats.dof_resid <= 0)
    throw std::runtime_error("no residual degrees of freedom");

  Eigen::MatrixXd bread = gram_inverse(p.X);
  std::vector<FactorColumn> clusters = resolve_clusters(design, cov);
  CovOut co = covariance(p.X, u, bread, r.stats.dof_resid, cov, clusters);
  r.coefs = make_table(p.x_names, beta, co);
  fill_common(r, design, p, cov, co);
  return r;
}

IVResult tsls(const DesignMatrices& design, const CovarianceSpec& cov,
              const EstimationOptions& options) {
  if (!design.has_endog())
    throw std::invalid_argument("design has no endogenous column for tsls");
  if (design.z_excluded.cols() == 0)
    throw std::invalid_argument("design has no excluded instruments");

  Prepared p = prepare(design, options);
  const Eigen::Index n = p.y.size();
  const Eigen::Index k = p.X.cols();
  const Eigen::Index q = p.Z.cols();

  std::vector<FactorColumn> clusters = resolve_clusters(design, cov);
  IVResult out;

  // First stage: endogenous column on instruments and exogenous slopes.
  Eigen::MatrixXd w1(n, q + k);
  w1.leftCols(q) = p.Z;
  w1.rightCols(k) = p.X;
  std::vector<std::string> w1_names = design.z_names;
  w1_names.insert(w1_names.end(), p.x_names.begin(), p.x_names.end());
  check_full_rank(w1, w1_names);

  Eigen::VectorXd pi = w1.completeOrthogonalDecomposition().solve(p.endog);
  Eigen::VectorXd xhat = w1 * pi;
  Eigen::VectorXd v = p.endog - xhat;
  double fs_rss = v.squaredNorm();
  long fs_dof = n - p.arank.rank - (q + k);
  if (fs_dof <= 0) throw std::runtime_error("no residual degrees of freedom");

  Eigen::MatrixXd bread1 = gram_inverse(w1);
  CovOut co1 = covariance(w1, v, bread1, fs_dof, cov, clusters);
  out.first.coefs = make_table(w1_names, pi, co1);

  double endog_scale = std::max(1.0, p.endog.squaredNorm());
  if (fs_rss <= 1e-24 * endog_scale) {
    out.first.f_excluded = std::numeric_limits<double>::infinity();
    out.first.f_p = 0.0;
  } else {
    Eigen::VectorXd rq = pi.head(q);
    Eigen::MatrixXd vq = co1.V.topLeftCorner(q, q);
    Eigen::MatrixXd vq_inv = vq.completeOrthogonalDecomposition().pseudoInverse();
    out.first.f_excluded = rq.dot(vq_inv * rq) / static_cast<double>(q);
    out.first.f_p = f_upper_p(out.first.f_excluded, static_cast<double>(q), co1.t_dof);
  }
  out.first.weak = out.first.f_excluded < options.weak_f_threshold;

  // Second stage on the projected endogenous column; residuals and fit use
  // the original column.
  Eigen::MatrixXd w2(n, 1 + k);
  w2.col(0) = xhat;
  w2.rightCols(k) = p.X;
  std::vector<std::string> w2_names;
  w2_names.push_back(design.endog_name);
  w2_names.insert(w2_names.end(), p.x_names.begin(), p.x_names.end());

  Eigen::VectorXd b = w2.completeOrthogonalDecomposition().solve(p.y);
  Eigen::VectorXd u = p.y - b[0] * p.endog;
  if (k > 0) u -= p.X * b.tail(k);
  double rss = u.squaredNorm();

  out.second.stats = make_stats(p, rss, 1 + k);
  if (out.second.stats.dof_resid <= 0)
    throw std::runtime_error("no residual degrees of freedom");

  Eigen::MatrixXd bread2 = gram_inverse(w2);
  CovOut co2 = covariance(w2, u, bread2, out.second.stats.dof_resid, cov, clusters);
  out.second.coefs = make_table(w2_names, b, co2);
  fill_common(out.second, design, p, cov, co2);
  if (out.first.weak) {
    std::ostringstream os;
    os << "weak instrument: first-stage F " << out.first.f_excluded << " below "
       << options.weak_f_threshold;
    out.second.warnings.push_back(os.str());
  }

  // Wu-Hausman in control-function form: the first-stage residual joins the
  // regression; its t-statistic squared is the test.
  double v_scale = std::sqrt(fs_rss / static_cast<double>(n));
  double e_sd = std::sqrt(p.endog.squaredNorm() / static_cast<double>(n));
  if (v_scale <= 1e-10 * std::max(1.0, e_sd)) {
    out.wu_hausman = kNan;
    out.wu_hausman_p = kNan;
    out.wu_hausman_degenerate = true;
    out.second.warnings.push_back(
        "exogeneity test degenerate: the instrument reproduces the endogenous "
        "column, so exogeneity holds by construction");
  } else {
    Eigen::MatrixXd wa(n, 1 + k + 1);
    wa.col(0) = p.endog;
    if (k > 0) wa.middleCols(1, k) = p.X;
    wa.col(1 + k) = v;
    Eigen::VectorXd ba = wa.completeOrthogonalDecomposition().solve(p.y);
    Eigen::VectorXd ua = p.y - wa * ba;
    long dofa = n - p.arank.rank - (1 + k + 1);
    if (dofa > 0) {
      Eigen::MatrixXd breada = gram_inverse(wa);
      CovOut coa = covariance(wa, ua, breada, dofa, cov, clusters);
      double var_v = coa.V(1 + k, 1 + k);
      if (var_v > 0) {
        double tv = ba[1 + k] / std::sqrt(var_v);
        out.wu_hausman = tv * tv;
        out.wu_hausman_p = f_upper_p(out.wu_hausman, 1.0, coa.t_dof);
      } else {
        out.wu_hausman = kNan;
        out.wu_hausman_p = kNan;
        out.wu_hausman_degenerate = true;
      }
    } else {
      out.wu_hausman = kNan;
      out.wu_hausman_p = kNan;
      out.wu_hausman_degenerate = true;
    }
  }
  return out;
}

}  // namespace draftiv
