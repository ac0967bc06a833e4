#include <CLI11.hpp>
#include <filesystem>
#include <iostream>
#include <json.hpp>

#include "draftiv/bandwagon.hpp"
#include "draftiv/csv.hpp"
#include "draftiv/dgp.hpp"
#include "draftiv/estimators.hpp"
#include "draftiv/formula.hpp"
#include "draftiv/grouping.hpp"
#include "draftiv/hdfe.hpp"
#include "draftiv/instruments.hpp"
#include "draftiv/panel.hpp"
#include "draftiv/pipeline.hpp"
#include "draftiv/report.hpp"

namespace fs = std::filesystem;
using namespace draftiv;

namespace {

OutcomeSpec outcome_from_flags(const std::string& mode, double shift, long rankcap) {
  OutcomeSpec spec;
  if (!mode.empty()) {
    spec.explicit_mode = true;
    if (mode == "logrank")
      spec.mode = OutcomeMode::LogRankPlus1;
    else if (mode == "centered")
      spec.mode = OutcomeMode::CenteredLog;
    else if (mode == "raw")
      spec.mode = OutcomeMode::Raw;
    else
      throw std::invalid_argument("unknown outcome mode '" + mode + "'");
  }
  spec.shift_c = shift;
  if (rankcap > 0) spec.rank_cap = static_cast<double>(rankcap);
  return spec;
}

int cmd_ingest(const IngestPaths& paths, const std::string& out_dir) {
  fs::create_directories(out_dir);
  RawTables raw = load_tables(paths);
  MergeOutput merged = merge_and_clean(raw, &raw.rejects);
  Panel panel = std::move(merged.panel);
  CovariateAudit cov = derive_covariates(panel, PeriodBoundaries{}, &raw.rejects);
  write_panel((fs::path(out_dir) / "panel.csv").string(), panel);
  write_reject_report((fs::path(out_dir) / "rejects.csv").string(), raw.rejects);
  std::cout << "results in: " << merged.audit.input << "\n"
            << "panel rows: " << panel.size() << "\n"
            << "rejected:   " << raw.rejects.size() << "\n"
            << "age-invalid: " << cov.dropped_invalid_age << "\n";
  return 0;
}

int cmd_cluster(const std::string& panel_path, const std::string& out_path,
                double threshold, const std::string& linkage, double gamma,
                double lambda) {
  Panel panel = read_panel(panel_path);
  ClusterConfig cfg;
  cfg.threshold = threshold;
  if (linkage == "single")
    cfg.linkage = Linkage::Single;
  else if (linkage == "complete")
    cfg.linkage = Linkage::Complete;
  else
    throw std::invalid_argument("unknown linkage '" + linkage + "'");
  cfg.benefit_params.gamma = gamma;
  cfg.benefit_params.lambda = lambda;
  cfg.benefit_params.validate();
  assign_groups(panel, cfg);
  write_panel(out_path, panel);
  long groups = 0;
  for (const auto& r : panel)
    if (r.position == 1) ++groups;
  std::cout << "rows: " << panel.size() << "\ngroups: " << groups << "\n";
  return 0;
}

int cmd_instrument(const std::string& panel_path, const std::string& out_path,
                   const std::string& kind, bool standardize) {
  Panel panel = read_panel(panel_path);
  InstrumentOptions opt;
  if (kind == "loo")
    opt.kind = InstrumentKind::Loo;
  else if (kind == "projected")
    opt.kind = InstrumentKind::Projected;
  else
    throw std::invalid_argument("unknown instrument kind '" + kind + "'");
  opt.standardize_within_event = standardize;
  InstrumentAudit audit = build_instrument(panel, opt);
  write_panel(out_path, panel);
  std::cout << "rows: " << audit.rows << "\nmissing: " << audit.missing << "\n";
  return 0;
}

int cmd_estimate(const std::string& panel_path, const std::string& formula_text,
                 const std::string& se, const std::string& out_path,
                 bool group_fe_event_keyed, const std::string& cluster_regressor) {
  Panel panel = read_panel(panel_path);
  FormulaSpec f = parse_formula(formula_text);
  CovarianceSpec cov;
  if (!se.empty())
    cov = CovarianceSpec::parse(se);
  else if (!f.cluster.empty())
    cov.variant = CovVariant::Cluster;
  DesignOptions design_opt;
  design_opt.group_fe_event_keyed = group_fe_event_keyed;
  if (cluster_regressor == "size")
    design_opt.cluster_regressor = DesignOptions::ClusterRegressor::Size;
  DesignMatrices design = build_design(panel, f, design_opt);
  NamedResult named;
  if (f.endogenous) {
    IVResult iv = tsls(design, cov);
    named = named_iv("estimate", iv, formula_text);
  } else {
    RegressionResult r = ols(design, cov);
    named = named_ols("estimate", r, formula_text);
  }
  TableLayout layout;
  std::cout << render_table({named}, layout, TableFormat::Markdown);
  for (const auto& w : named.reg.warnings) std::cout << "warning: " << w << "\n";
  if (!out_path.empty()) {
    nlohmann::json j;
    j["results"] = nlohmann::json::array();
    nlohmann::json rec;
    rec["name"] = named.name;
    rec["formula"] = formula_text;
    rec["estimator"] = named.is_iv ? "tsls" : "ols";
    nlohmann::json arr = nlohmann::json::array();
    for (size_t i = 0; i < named.reg.coefs.names.size(); ++i) {
      auto idx = static_cast<Eigen::Index>(i);
      arr.push_back({{"name", named.reg.coefs.names[i]},
                     {"coef", named.reg.coefs.coef[idx]},
                     {"se", named.reg.coefs.se[idx]},
                     {"p", named.reg.coefs.pval[idx]}});
    }
    rec["coefficients"] = arr;
    rec["n"] = named.reg.stats.n;
    if (named.is_iv) {
      rec["first_stage_f"] = named.first.f_excluded;
      rec["wu_hausman_p"] = named.wu_hausman_p;
    }
    j["results"].push_back(rec);
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_bandwagon(const std::string& panel_path, const std::string& bands,
                  const std::string& se, const std::string& outcome_mode,
                  double shift, long rankcap, const std::string& groupsize,
                  const std::string& out_path, const std::string& figure_path,
                  bool all_rows, int threads) {
  Panel panel = read_panel(panel_path);
  BandwagonOptions opt;
  opt.outcome = outcome_from_flags(outcome_mode, shift, rankcap);
  opt.cov = CovarianceSpec::parse(se);
  if (!groupsize.empty()) opt.group_size = GroupSizePredicate::parse(groupsize);
  opt.threads = threads;
  std::vector<BandPair> pairs =
      bands.empty() ? default_band_ladder() : parse_band_ladder(bands);
  auto comparisons = run_band_comparisons(panel, pairs, opt);
  for (const auto& c : comparisons) {
    std::cout << c.label << ": ";
    if (c.feasible)
      std::cout << c.estimate << " (" << c.se << "), " << c.pct_change << "%\n";
    else
      std::cout << "infeasible (" << c.note << ")\n";
  }
  if (!out_path.empty()) write_band_table(out_path, comparisons);
  if (!figure_path.empty())
    write_figure_csv(figure_path, emit_figure_data(comparisons, 0.05, !all_rows));
  return 0;
}

int cmd_simulate(const std::string& config_path, long reps, uint64_t seed,
                 const std::string& out_dir) {
  DgpConfig dgp;
  if (!config_path.empty()) {
    // The run-config parser owns the JSON shape; reuse it via a wrapper.
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string wrapped = R"({"simulate":[{"name":"cli","reps":1,"dgp":)" +
                          ss.str() + "}]}";
    RunConfig rc = RunConfig::from_json_text(wrapped);
    dgp = rc.simulations.at(0).dgp;
  }
  dgp.validate();
  fs::create_directories(out_dir);
  for (long rep = 0; rep < reps; ++rep) {
    SimulatedPanel sim = simulate_panel(dgp, split_seed(seed, static_cast<uint64_t>(rep)));
    std::string base = "rep" + std::to_string(rep);
    write_panel((fs::path(out_dir) / (base + ".csv")).string(), sim.panel);
    nlohmann::json truth;
    truth["seed"] = sim.truth.seed;
    truth["beta_treat"] = sim.truth.beta_treat;
    truth["beta_leader"] = sim.truth.beta_leader;
    truth["endogeneity"] = sim.truth.endogeneity;
    truth["treatment"] = sim.truth.treatment;
    std::ofstream out(fs::path(out_dir) / (base + "_truth.json"),
                      std::ios::binary);
    out << truth.dump(2) << "\n";
    std::cout << base << ": " << sim.panel.size() << " rows\n";
  }
  return 0;
}

int cmd_report(const std::string& panel_path, const std::string& out_dir) {
  Panel panel = read_panel(panel_path);
  fs::create_directories(out_dir);
  write_summary_csv((fs::path(out_dir) / "summary.csv").string(),
                    summary_stats(panel));
  write_balance_csv((fs::path(out_dir) / "balance.csv").string(),
                    balance_by_category_period(panel));
  std::cout << "summary.csv and balance.csv written to " << out_dir << "\n";
  return 0;
}

int cmd_run(const std::string& config_path, uint64_t seed, bool seed_set,
            const std::string& out_dir, int threads, bool threads_set) {
  RunConfig cfg = RunConfig::from_json_file(config_path);
  if (seed_set) cfg.seed = seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads_set) cfg.threads = threads;
  auto artifacts = run_pipeline(cfg, std::cout);
  std::cout << artifacts.size() << " artifact(s) under " << cfg.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"drafting-panel pipeline"};
  app.require_subcommand(1);

  auto* ingest = app.add_subcommand("ingest", "read raw tables into a panel");
  IngestPaths paths;
  std::string out_dir = "out";
  ingest->add_option("--athletes", paths.athletes)->required();
  ingest->add_option("--events", paths.events)->required();
  ingest->add_option("--results", paths.results)->required();
  ingest->add_option("--out", out_dir, "output directory");

  auto* cluster = app.add_subcommand("cluster", "assign drafting groups");
  std::string panel_path, cluster_out;
  double threshold = 5.0, gamma = 1.0, lambda = 0.5;
  std::string linkage = "single";
  cluster->add_option("--panel", panel_path)->required();
  cluster->add_option("--out", cluster_out)->required();
  cluster->add_option("--threshold", threshold, "gap threshold in seconds");
  cluster->add_option("--linkage", linkage)->check(CLI::IsMember({"single", "complete"}));
  cluster->add_option("--gamma", gamma, "benefit ceiling");
  cluster->add_option("--lambda", lambda, "benefit decay");

  auto* instrument = app.add_subcommand("instrument", "build leave-one-out columns");
  std::string inst_panel, inst_out, inst_kind = "loo";
  bool standardize = false;
  instrument->add_option("--panel", inst_panel)->required();
  instrument->add_option("--out", inst_out)->required();
  instrument->add_option("--kind", inst_kind)->check(CLI::IsMember({"loo", "projected"}));
  instrument->add_flag("--standardize", standardize, "z-score within event first");

  auto* estimate = app.add_subcommand("estimate", "run one specification");
  std::string est_panel, est_formula, est_se, est_out, est_cluster_reg = "index";
  bool est_group_ek = false;
  estimate->add_option("--panel", est_panel)->required();
  estimate->add_option("--formula", est_formula)->required();
  estimate->add_option("--se", est_se, "iid | hc1 | cluster:<f> | twoway:<f1>,<f2>");
  estimate->add_option("--out", est_out, "results JSON path");
  estimate->add_flag("--group-fe-event-keyed", est_group_ek,
                     "key group effects by (event, group)");
  estimate->add_option("--cluster-regressor", est_cluster_reg)
      ->check(CLI::IsMember({"index", "size"}));

  auto* band = app.add_subcommand("bandwagon", "pooled band comparisons");
  std::string band_panel, band_spec, band_se = "cluster:event", band_groupsize;
  std::string band_out, band_figure, band_outcome;
  double band_shift = 1.0;
  long band_rankcap = 0;
  bool band_all = false;
  int band_threads = 1;
  band->add_option("--panel", band_panel)->required();
  band->add_option("--bands", band_spec, "e.g. 1-2:3-4,2-3:4-5");
  band->add_option("--se", band_se);
  band->add_option("--outcome", band_outcome)->check(CLI::IsMember({"logrank", "centered", "raw"}));
  band->add_option("--shift", band_shift, "centering shift constant");
  band->add_option("--rankcap", band_rankcap);
  band->add_option("--groupsize", band_groupsize, "e.g. '<10'");
  band->add_option("--out", band_out, "comparison table CSV");
  band->add_option("--figure", band_figure, "figure data CSV");
  band->add_flag("--all", band_all, "keep insignificant rows in figure data");
  band->add_option("--threads", band_threads);

  auto* simulate = app.add_subcommand("simulate", "draw synthetic panels");
  std::string sim_config, sim_out = "out";
  long sim_reps = 1;
  uint64_t sim_seed = 1;
  simulate->add_option("--config", sim_config, "DGP JSON file");
  simulate->add_option("--reps", sim_reps);
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--out", sim_out);

  auto* report = app.add_subcommand("report", "summary and balance tables");
  std::string rep_panel, rep_out = "out";
  report->add_option("--panel", rep_panel)->required();
  report->add_option("--out", rep_out);

  auto* run = app.add_subcommand("run", "full configured pipeline");
  std::string run_config, run_out;
  uint64_t run_seed = 0;
  int run_threads = 1;
  run->add_option("--config", run_config)->required();
  auto* seed_opt = run->add_option("--seed", run_seed);
  run->add_option("--out", run_out, "override output directory");
  auto* threads_opt = run->add_option("--threads", run_threads);

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return cmd_ingest(paths, out_dir);
    if (cluster->parsed())
      return cmd_cluster(panel_path, cluster_out, threshold, linkage, gamma, lambda);
    if (instrument->parsed())
      return cmd_instrument(inst_panel, inst_out, inst_kind, standardize);
    if (estimate->parsed())
      return cmd_estimate(est_panel, est_formula, est_se, est_out, est_group_ek,
                          est_cluster_reg);
    if (band->parsed())
      return cmd_bandwagon(band_panel, band_spec, band_se, band_outcome, band_shift,
                           band_rankcap, band_groupsize, band_out, band_figure,
                           band_all, band_threads);
    if (simulate->parsed()) return cmd_simulate(sim_config, sim_reps, sim_seed, sim_out);
    if (report->parsed()) return cmd_report(rep_panel, rep_out);
    if (run->parsed())
      return cmd_run(run_config, run_seed, seed_opt->count() > 0, run_out,
                     run_threads, threads_opt->count() > 0);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
