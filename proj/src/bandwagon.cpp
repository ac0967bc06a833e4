#include "draftiv/bandwagon.hpp"

#include <cmath>
#include <mutex>
#include <stdexcept>

#include "draftiv/csv.hpp"
#include "draftiv/dgp.hpp"
#include "draftiv/stats.hpp"

namespace draftiv {

std::vector<BandPair> default_band_ladder() {
  std::vector<BandPair> out;
  for (int lo = 1; lo <= 7; ++lo)
    out.push_back(BandPair{Band{lo, lo + 1}, Band{lo + 2, lo + 3}});
  return out;
}

namespace {

BandComparison run_one(const Panel& panel, const BandPair& pair,
                       const BandwagonOptions& opt) {
  BandComparison c;
  c.pair = pair;
  c.label = pair.label();

  FormulaSpec spec;
  spec.response = "y";
  spec.outcome = opt.outcome;
  spec.endogenous = "treat";
  spec.instruments = {opt.instrument};
  spec.absorb = opt.absorb;
  spec.filters.band = pair;
  spec.filters.group_size = opt.group_size;
  spec.text = "y ~ 1 | iv: treat ~ " + opt.instrument + " | band " + c.label;

  DesignMatrices design;
  try {
    design = build_design(panel, spec);
  } catch (const std::runtime_error& e) {
    c.note = e.what();  // empty sample after filters
    return c;
  }

  for (Eigen::Index i = 0; i < design.x_endog.size(); ++i) {
    if (design.x_endog[i] > 0.5)
      ++c.n_treated;
    else
      ++c.n_control;
  }
  if (c.n_control == 0 || c.n_treated == 0) {
    c.note = c.n_control == 0 ? "control arm empty after filters"
                              : "treated arm empty after filters";
    return c;
  }

  IVResult iv = tsls(design, opt.cov, opt.estimation);
  int idx = iv.second.coefs.find("treat");
  if (idx < 0) throw std::logic_error("treatment coefficient missing");
  c.feasible = true;
  c.estimate = iv.second.coefs.coef[idx];
  c.se = iv.second.coefs.se[idx];
  c.pval = iv.second.coefs.pval[idx];
  double crit = normal_quantile(0.5 + opt.ci_level / 2.0);
  c.ci_low = c.estimate - crit * c.se;
  c.ci_high = c.estimate + crit * c.se;
  c.pct_change = semi_elasticity(c.estimate);
  c.first_stage_f = iv.first.f_excluded;
  c.n_obs = iv.second.stats.n;
  return c;
}

}  // namespace

std::vector<BandComparison> run_band_comparisons(const Panel& panel,
                                                 const std::vector<BandPair>& pairs,
                                                 const BandwagonOptions& options) {
  std::vector<BandComparison> out(pairs.size());
  std::exception_ptr failure;
  std::mutex guard;
  parallel_for(static_cast<long>(pairs.size()), options.threads, [&](long i) {
    try {
      out[static_cast<size_t>(i)] = run_one(panel, pairs[static_cast<size_t>(i)], options);
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  });
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<FigureRow> emit_figure_data(const std::vector<BandComparison>& comparisons,
                                        double alpha, bool significant_only) {
  std::vector<FigureRow> rows;
  for (const auto& c : comparisons) {
    if (!c.feasible) continue;
    FigureRow r;
    r.label = c.label;
    r.estimate = c.estimate;
    r.ci_low = c.ci_low;
    r.ci_high = c.ci_high;
    r.pct_change = c.pct_change;
    r.significant = c.pval < alpha;
    if (significant_only && !r.significant) continue;
    rows.push_back(r);
  }
  return rows;
}

void write_band_table(const std::string& path,
                      const std::vector<BandComparison>& comparisons,
                      const std::string& comment) {
  CsvTable t;
  t.header = {"comparison", "feasible", "estimate", "se",     "ci_low",
              "ci_high",    "p_value",  "pct_change", "first_stage_f",
              "n_obs",      "n_control", "n_treated", "note"};
  for (const auto& c : comparisons) {
    std::vector<std::string> row;
    row.push_back(c.label);
    row.push_back(c.feasible ? "1" : "0");
    if (c.feasible) {
      row.push_back(format_double(c.estimate));
      row.push_back(format_double(c.se));
      row.push_back(format_double(c.ci_low));
      row.push_back(format_double(c.ci_high));
      row.push_back(format_double(c.pval));
      row.push_back(format_double(c.pct_change));
      row.push_back(format_double(c.first_stage_f));
      row.push_back(std::to_string(c.n_obs));
      row.push_back(std::to_string(c.n_control));
      row.push_back(std::to_string(c.n_treated));
    } else {
      for (int i = 0; i < 10; ++i) row.push_back("");
    }
    row.push_back(c.note);
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t, ',', comment);
}

void write_figure_csv(const std::string& path, const std::vector<FigureRow>& rows,
                      const std::string& comment) {
  CsvTable t;
  t.header = {"label", "estimate", "ci_low", "ci_high", "pct_change", "significant"};
  for (const auto& r : rows) {
    t.rows.push_back({r.label, format_double(r.estimate), format_double(r.ci_low),
                      format_double(r.ci_high), format_double(r.pct_change),
                      r.significant ? "1" : "0"});
  }
  write_csv(path, t, ',', comment);
}

}  // namespace draftiv
