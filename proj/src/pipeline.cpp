#include "draftiv/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <ostream>
#include <set>
#include <sstream>

#include "draftiv/csv.hpp"
#include "draftiv/estimators.hpp"
#include "draftiv/formula.hpp"
#include "draftiv/stats.hpp"

namespace draftiv {

namespace fs = std::filesystem;
using nlohmann::json;

uint64_t fnv1a64(std::string_view data) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const RunConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(config.canonical)));
  return buf;
}

namespace {

[[noreturn]] void config_error(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(std::string("bad value for '") + key + "'");
  }
}

std::string get_path(const json& j, const char* key) {
  return get_or<std::string>(j, key, "");
}

OutcomeSpec parse_outcome_json(const json& j) {
  OutcomeSpec spec;
  if (j.is_null()) return spec;
  std::string mode = get_or<std::string>(j, "mode", "logrank");
  if (mode == "logrank")
    spec.mode = OutcomeMode::LogRankPlus1;
  else if (mode == "centered")
    spec.mode = OutcomeMode::CenteredLog;
  else if (mode == "raw")
    spec.mode = OutcomeMode::Raw;
  else
    config_error("unknown outcome mode '" + mode + "'");
  spec.explicit_mode = true;
  spec.shift_c = get_or<double>(j, "shift", spec.shift_c);
  if (j.contains("rankcap")) spec.rank_cap = j.at("rankcap").get<double>();
  return spec;
}

FactorKind parse_factor_name(const std::string& s) {
  if (s == "athlete") return FactorKind::Athlete;
  if (s == "event") return FactorKind::Event;
  if (s == "group" || s == "cluster") return FactorKind::Group;
  if (s == "eventgroup") return FactorKind::EventGroup;
  config_error("unknown factor '" + s + "'");
}

DgpConfig parse_dgp_json(const json& j) {
  DgpConfig c;
  c.athletes = get_or<long>(j, "athletes", c.athletes);
  c.events = get_or<long>(j, "events", c.events);
  c.attendance = get_or<double>(j, "attendance", c.attendance);
  c.ability_sd = get_or<double>(j, "ability_sd", c.ability_sd);
  c.dayform_sd = get_or<double>(j, "dayform_sd", c.dayform_sd);
  c.swim_base = get_or<double>(j, "swim_base", c.swim_base);
  c.swim_scale = get_or<double>(j, "swim_scale", c.swim_scale);
  c.swim_noise_sd = get_or<double>(j, "swim_noise_sd", c.swim_noise_sd);
  c.grouping_noise_sd = get_or<double>(j, "grouping_noise_sd", c.grouping_noise_sd);
  c.geometric_p = get_or<double>(j, "geometric_p", c.geometric_p);
  c.max_group_size = get_or<int>(j, "max_group_size", c.max_group_size);
  std::string treat = get_or<std::string>(j, "treatment", "position");
  if (treat == "position")
    c.treatment = DgpConfig::Treatment::Position;
  else if (treat == "benefit")
    c.treatment = DgpConfig::Treatment::Benefit;
  else
    config_error("unknown dgp treatment '" + treat + "'");
  c.beta_treat = get_or<double>(j, "beta_treat", c.beta_treat);
  c.beta_leader = get_or<double>(j, "beta_leader", c.beta_leader);
  c.beta_age = get_or<double>(j, "beta_age", c.beta_age);
  c.beta_male = get_or<double>(j, "beta_male", c.beta_male);
  c.athlete_fe_sd = get_or<double>(j, "athlete_fe_sd", c.athlete_fe_sd);
  c.event_fe_sd = get_or<double>(j, "event_fe_sd", c.event_fe_sd);
  c.endogeneity = get_or<double>(j, "endogeneity", c.endogeneity);
  c.outcome_noise_sd = get_or<double>(j, "outcome_noise_sd", c.outcome_noise_sd);
  c.paired_step_outcome = get_or<bool>(j, "paired_step_outcome", false);
  c.require_instrument = get_or<bool>(j, "require_instrument", true);
  c.benefit_params.gamma = get_or<double>(j, "gamma", c.benefit_params.gamma);
  c.benefit_params.lambda = get_or<double>(j, "lambda", c.benefit_params.lambda);
  return c;
}

Date parse_date_or_die(const std::string& s, const char* what) {
  auto d = Date::parse(s);
  if (!d) config_error(std::string("bad date for ") + what + ": '" + s + "'");
  return *d;
}

void apply_env_overrides(RunConfig& c) {
  if (const char* v = std::getenv("DRAFTIV_ATHLETES")) c.inputs.athletes = v;
  if (const char* v = std::getenv("DRAFTIV_EVENTS")) c.inputs.events = v;
  if (const char* v = std::getenv("DRAFTIV_RESULTS")) c.inputs.results = v;
  if (const char* v = std::getenv("DRAFTIV_PANEL")) c.panel_path = v;
  if (const char* v = std::getenv("DRAFTIV_OUT")) c.out_dir = v;
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.canonical = j.dump();

  if (j.contains("inputs")) {
    const json& in = j.at("inputs");
    c.inputs.athletes = get_path(in, "athletes");
    c.inputs.events = get_path(in, "events");
    c.inputs.results = get_path(in, "results");
  }
  c.panel_path = get_path(j, "panel");
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir);
  c.seed = get_or<uint64_t>(j, "seed", c.seed);
  c.threads = get_or<int>(j, "threads", c.threads);

  if (j.contains("clustering")) {
    const json& cl = j.at("clustering");
    c.do_cluster = get_or<bool>(cl, "enabled", true);
    c.clustering.threshold = get_or<double>(cl, "threshold", c.clustering.threshold);
    std::string lk = get_or<std::string>(cl, "linkage", "single");
    if (lk == "single")
      c.clustering.linkage = Linkage::Single;
    else if (lk == "complete")
      c.clustering.linkage = Linkage::Complete;
    else
      config_error("unknown linkage '" + lk + "'");
    c.clustering.benefit_params.gamma =
        get_or<double>(cl, "gamma", c.clustering.benefit_params.gamma);
    c.clustering.benefit_params.lambda =
        get_or<double>(cl, "lambda", c.clustering.benefit_params.lambda);
  }
  if (j.contains("instrument")) {
    const json& in = j.at("instrument");
    c.do_instrument = get_or<bool>(in, "enabled", true);
    std::string kind = get_or<std::string>(in, "kind", "loo");
    if (kind == "loo")
      c.instrument.kind = InstrumentKind::Loo;
    else if (kind == "projected")
      c.instrument.kind = InstrumentKind::Projected;
    else
      config_error("unknown instrument kind '" + kind + "'");
    c.instrument.standardize_within_event = get_or<bool>(in, "standardize", false);
  }
  if (j.contains("periods")) {
    const json& p = j.at("periods");
    if (p.contains("covid_start"))
      c.periods.covid_start =
          parse_date_or_die(p.at("covid_start").get<std::string>(), "covid_start");
    if (p.contains("post_start"))
      c.periods.post_start =
          parse_date_or_die(p.at("post_start").get<std::string>(), "post_start");
  }
  if (j.contains("design")) {
    const json& d = j.at("design");
    c.design.group_fe_event_keyed = get_or<bool>(d, "group_fe_event_keyed", false);
    std::string cr = get_or<std::string>(d, "cluster_regressor", "index");
    if (cr == "index")
      c.design.cluster_regressor = DesignOptions::ClusterRegressor::Index;
    else if (cr == "size")
      c.design.cluster_regressor = DesignOptions::ClusterRegressor::Size;
    else
      config_error("unknown cluster_regressor '" + cr + "'");
  }
  c.design.benefit_params = c.clustering.benefit_params;
  if (j.contains("estimation")) {
    const json& e = j.at("estimation");
    c.estimation.within_tol = get_or<double>(e, "within_tol", c.estimation.within_tol);
    c.estimation.within_max_iter =
        get_or<long>(e, "within_max_iter", c.estimation.within_max_iter);
    c.estimation.weak_f_threshold =
        get_or<double>(e, "weak_f_threshold", c.estimation.weak_f_threshold);
  }

  for (const json& js : get_or<std::vector<json>>(j, "specifications", {})) {
    SpecConfig s;
    s.name = get_or<std::string>(js, "name", "");
    s.formula = get_or<std::string>(js, "formula", "");
    s.se = get_or<std::string>(js, "se", "");
    if (s.name.empty()) config_error("specification without a name");
    if (s.formula.empty())
      config_error("specification '" + s.name + "' has no formula");
    c.specifications.push_back(std::move(s));
  }

  for (const json& jt : get_or<std::vector<json>>(j, "tables", {})) {
    TableConfig t;
    t.file = get_or<std::string>(jt, "file", "");
    t.title = get_or<std::string>(jt, "title", "");
    t.columns = get_or<std::vector<std::string>>(jt, "columns", {});
    std::string stars = get_or<std::string>(jt, "stars", "coarse");
    if (stars == "coarse")
      t.stars = StarConvention::Coarse;
    else if (stars == "fine")
      t.stars = StarConvention::Fine;
    else
      config_error("unknown star convention '" + stars + "'");
    auto formats = get_or<std::vector<std::string>>(jt, "formats", {"csv", "md"});
    t.csv = false;
    t.markdown = false;
    for (const auto& f : formats) {
      if (f == "csv")
        t.csv = true;
      else if (f == "md" || f == "markdown")
        t.markdown = true;
      else
        config_error("unknown table format '" + f + "'");
    }
    if (t.file.empty()) config_error("table without a file name");
    c.tables.push_back(std::move(t));
  }

  if (j.contains("bandwagon")) {
    const json& jb = j.at("bandwagon");
    c.bandwagon.enabled = get_or<bool>(jb, "enabled", true);
    std::string bands = get_or<std::string>(jb, "bands", "");
    if (!bands.empty()) c.bandwagon.pairs = parse_band_ladder(bands);
    if (jb.contains("outcome"))
      c.bandwagon.options.outcome = parse_outcome_json(jb.at("outcome"));
    if (jb.contains("fe")) {
      c.bandwagon.options.absorb.clear();
      for (const auto& f : jb.at("fe").get<std::vector<std::string>>())
        c.bandwagon.options.absorb.push_back(parse_factor_name(f));
    }
    std::string se = get_or<std::string>(jb, "se", "");
    if (!se.empty()) c.bandwagon.options.cov = CovarianceSpec::parse(se);
    c.bandwagon.options.instrument =
        get_or<std::string>(jb, "instrument", c.bandwagon.options.instrument);
    std::string gs = get_or<std::string>(jb, "groupsize", "");
    if (!gs.empty()) c.bandwagon.options.group_size = GroupSizePredicate::parse(gs);
    c.bandwagon.options.ci_level =
        get_or<double>(jb, "ci_level", c.bandwagon.options.ci_level);
    c.bandwagon.alpha = get_or<double>(jb, "alpha", c.bandwagon.alpha);
    c.bandwagon.significant_only = get_or<bool>(jb, "significant_only", true);
    c.bandwagon.table_file =
        get_or<std::string>(jb, "table_file", c.bandwagon.table_file);
    c.bandwagon.figure_file =
        get_or<std::string>(jb, "figure_file", c.bandwagon.figure_file);
  }

  for (const json& s : get_or<std::vector<json>>(j, "simulate", {})) {
    SimulateConfig sc;
    sc.name = get_or<std::string>(s, "name", "");
    if (sc.name.empty()) config_error("simulate entry without a name");
    sc.reps = get_or<long>(s, "reps", 1);
    if (sc.reps < 1) config_error("simulate '" + sc.name + "': reps < 1");
    if (s.contains("dgp")) sc.dgp = parse_dgp_json(s.at("dgp"));
    c.simulations.push_back(std::move(sc));
  }

  c.emit_summary = get_or<bool>(j, "summary", true);
  apply_env_overrides(c);
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

void RunConfig::validate() const {
  bool in_partial = !inputs.athletes.empty() || !inputs.events.empty() ||
                    !inputs.results.empty();
  bool in_full = !inputs.athletes.empty() && !inputs.events.empty() &&
                 !inputs.results.empty();
  if (in_partial && !in_full)
    config_error("inputs need all three of athletes, events, results");
  if (in_full && !panel_path.empty())
    config_error("give either raw inputs or a prebuilt panel, not both");

  std::set<std::string> names;
  for (const auto& s : specifications) {
    if (!names.insert(s.name).second)
      config_error("duplicate specification name '" + s.name + "'");
    FormulaSpec f;
    try {
      f = parse_formula(s.formula);
      f.validate();
      if (!s.se.empty()) CovarianceSpec::parse(s.se);
    } catch (const std::exception& e) {
      config_error("specification '" + s.name + "': " + e.what());
    }
    auto check_col = [&](const std::string& col) {
      if (col.empty() || col == "const") return;
      if (col == "treat") {
        if (!f.filters.band)
          config_error("specification '" + s.name +
                       "' uses 'treat' without a band filter");
        return;
      }
      if (!is_known_column(col))
        config_error("specification '" + s.name + "' references unknown column '" +
                     col + "'");
    };
    for (const auto& t : f.terms) {
      check_col(t.a);
      check_col(t.b);
    }
    if (f.endogenous) check_col(*f.endogenous);
    for (const auto& z : f.instruments) check_col(z);
  }

  for (const auto& t : tables)
    for (const auto& col : t.columns)
      if (!names.count(col))
        config_error("table '" + t.file + "' references unknown specification '" +
                     col + "'");

  std::set<std::string> sim_names;
  for (const auto& s : simulations) {
    if (!sim_names.insert(s.name).second)
      config_error("duplicate simulate name '" + s.name + "'");
    try {
      s.dgp.validate();
    } catch (const std::exception& e) {
      config_error("simulate '" + s.name + "': " + e.what());
    }
  }

  bool needs_panel = !specifications.empty() || bandwagon.enabled;
  if (needs_panel && !in_full && panel_path.empty())
    config_error("estimation stages configured without a panel source");
}

namespace {

json num6(double v) {
  if (std::isnan(v) || std::isinf(v)) return nullptr;
  return std::stod(format_double(v));
}

json coefs_json(const CoefTable& t) {
  json arr = json::array();
  for (size_t i = 0; i < t.names.size(); ++i) {
    json row;
    row["name"] = t.names[i];
    row["coef"] = num6(t.coef[static_cast<Eigen::Index>(i)]);
    row["se"] = num6(t.se[static_cast<Eigen::Index>(i)]);
    row["t"] = num6(t.tstat[static_cast<Eigen::Index>(i)]);
    row["p"] = num6(t.pval[static_cast<Eigen::Index>(i)]);
    arr.push_back(row);
  }
  return arr;
}

json audit_json(const DesignAudit& a) {
  return json{{"input", a.input},
              {"dropped_group_size", a.dropped_group_size},
              {"dropped_band", a.dropped_band},
              {"dropped_rank_cap", a.dropped_rank_cap},
              {"dropped_nonpositive_log", a.dropped_nonpositive_log},
              {"dropped_missing", a.dropped_missing},
              {"output", a.output}};
}

json result_json(const NamedResult& r) {
  json j;
  j["name"] = r.name;
  j["formula"] = r.formula_text;
  j["estimator"] = r.is_iv ? "tsls" : "ols";
  j["coefficients"] = coefs_json(r.reg.coefs);
  j["se_variant"] = r.reg.cov.str();
  j["t_dof"] = num6(r.reg.t_dof);
  json st;
  st["n"] = r.reg.stats.n;
  st["k"] = r.reg.stats.k;
  st["rank_absorbed"] = r.reg.stats.rank_absorbed;
  st["dof_resid"] = r.reg.stats.dof_resid;
  st["rmse"] = num6(r.reg.stats.rmse);
  st["r2"] = num6(r.reg.stats.r2);
  st["adj_r2"] = num6(r.reg.stats.adj_r2);
  st["within_r2"] = num6(r.reg.stats.within_r2);
  j["stats"] = st;
  j["absorbed_levels"] = r.reg.absorbed_levels;
  j["absorb_iterations"] = r.reg.absorb_iterations;
  if (!r.reg.cluster_names.empty()) {
    j["cluster_factors"] = r.reg.cluster_names;
    j["cluster_counts"] = r.reg.cluster_counts;
  }
  if (r.is_iv) {
    j["first_stage"] = {{"coefficients", coefs_json(r.first.coefs)},
                        {"f_excluded", num6(r.first.f_excluded)},
                        {"f_p", num6(r.first.f_p)},
                        {"weak", r.first.weak}};
    j["wu_hausman_p"] = num6(r.wu_hausman_p);
    j["wu_hausman_degenerate"] = r.wu_hausman_degenerate;
  }
  j["warnings"] = r.reg.warnings;
  j["audit"] = audit_json(r.reg.audit);
  return j;
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void write_json_file(const fs::path& p, const json& j) {
  write_text(p, j.dump(2) + "\n");
}

struct StageGuard {
  const char* stage;
  template <typename Fn>
  void operator()(Fn&& fn) const {
    try {
      fn();
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("stage ") + stage + ": " + e.what());
    }
  }
};

}  // namespace

std::vector<std::string> run_pipeline(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const std::string hash = config_hash(cfg);
  const std::string stamp = "config " + hash;
  fs::create_directories(cfg.out_dir);
  const fs::path out(cfg.out_dir);
  std::vector<std::string> written;
  json manifest;
  manifest["config_hash"] = hash;
  json audits;

  Panel panel;
  bool have_panel = false;

  if (cfg.has_inputs()) {
    StageGuard{"ingest"}([&] {
      RawTables raw = load_tables(cfg.inputs);
      MergeOutput merged = merge_and_clean(raw, &raw.rejects);
      panel = std::move(merged.panel);
      CovariateAudit cov = derive_covariates(panel, cfg.periods, &raw.rejects);
      write_reject_report((out / "rejects.csv").string(), raw.rejects);
      written.push_back("rejects.csv");
      audits["ingest"] = {{"input", merged.audit.input},
                          {"dropped_missing", merged.audit.dropped_missing},
                          {"dropped_dnf", merged.audit.dropped_dnf},
                          {"dropped_dns", merged.audit.dropped_dns},
                          {"dropped_unmatched", merged.audit.dropped_unmatched},
                          {"output", merged.audit.output}};
      audits["covariates"] = {{"input", cov.input},
                              {"dropped_invalid_age", cov.dropped_invalid_age},
                              {"output", cov.output}};
      log << "[ingest] " << merged.audit.input << " result rows -> "
          << panel.size() << " panel rows\n";
      have_panel = true;
    });
  } else if (!cfg.panel_path.empty()) {
    StageGuard{"ingest"}([&] {
      panel = read_panel(cfg.panel_path);
      log << "[ingest] read " << panel.size() << " panel rows from "
          << cfg.panel_path << "\n";
      have_panel = true;
    });
  }

  if (have_panel && cfg.do_cluster) {
    StageGuard{"cluster"}([&] {
      assign_groups(panel, cfg.clustering);
      log << "[cluster] threshold " << cfg.clustering.threshold << "s\n";
    });
  }
  if (have_panel && cfg.do_instrument) {
    StageGuard{"instrument"}([&] {
      InstrumentAudit ia = build_instrument(panel, cfg.instrument);
      audits["instrument"] = {{"rows", ia.rows}, {"missing", ia.missing}};
      log << "[instrument] " << ia.rows << " rows, " << ia.missing
          << " without a value\n";
    });
  }
  if (have_panel) {
    StageGuard{"panel"}([&] {
      write_panel((out / "panel.csv").string(), panel, stamp);
      written.push_back("panel.csv");
    });
  }

  std::vector<NamedResult> results;
  if (!cfg.specifications.empty()) {
    StageGuard{"estimate"}([&] {
      json results_arr = json::array();
      for (const auto& spec : cfg.specifications) {
        try {
          FormulaSpec f = parse_formula(spec.formula);
          CovarianceSpec cov;
          if (!spec.se.empty())
            cov = CovarianceSpec::parse(spec.se);
          else if (!f.cluster.empty())
            cov.variant = CovVariant::Cluster;
          DesignMatrices design = build_design(panel, f, cfg.design);
          NamedResult named;
          if (f.endogenous) {
            IVResult iv = tsls(design, cov, cfg.estimation);
            named = named_iv(spec.name, iv, spec.formula);
          } else {
            RegressionResult r = ols(design, cov, cfg.estimation);
            named = named_ols(spec.name, r, spec.formula);
          }
          results_arr.push_back(result_json(named));
          log << "[estimate] " << spec.name << ": n=" << named.reg.stats.n << "\n";
          results.push_back(std::move(named));
        } catch (const std::exception& e) {
          throw std::runtime_error("specification '" + spec.name + "': " + e.what());
        }
      }
      json jr;
      jr["config_hash"] = hash;
      jr["results"] = results_arr;
      write_json_file(out / "results.json", jr);
      written.push_back("results.json");
    });
  }

  if (!results.empty()) {
    StageGuard{"tables"}([&] {
      std::vector<TableConfig> tables = cfg.tables;
      if (tables.empty()) {
        TableConfig t;
        t.file = "all_specs";
        t.title = "All specifications";
        tables.push_back(t);
      }
      for (const auto& t : tables) {
        TableLayout layout;
        layout.title = t.title;
        layout.columns = t.columns;
        layout.stars = t.stars;
        if (t.csv) {
          std::string body = render_table(results, layout, TableFormat::Csv);
          write_text(out / (t.file + ".csv"), "# " + stamp + "\n" + body);
          written.push_back(t.file + ".csv");
        }
        if (t.markdown) {
          std::string body = render_table(results, layout, TableFormat::Markdown);
          write_text(out / (t.file + ".md"),
                     body + "\n<!-- " + stamp + " -->\n");
          written.push_back(t.file + ".md");
        }
      }
    });
  }

  if (cfg.bandwagon.enabled) {
    StageGuard{"bandwagon"}([&] {
      BandwagonOptions opt = cfg.bandwagon.options;
      opt.threads = cfg.threads;
      opt.estimation = cfg.estimation;
      std::vector<BandPair> pairs =
          cfg.bandwagon.pairs.empty() ? default_band_ladder() : cfg.bandwagon.pairs;
      auto comparisons = run_band_comparisons(panel, pairs, opt);
      write_band_table((out / (cfg.bandwagon.table_file + ".csv")).string(),
                       comparisons, stamp);
      written.push_back(cfg.bandwagon.table_file + ".csv");
      auto fig = emit_figure_data(comparisons, cfg.bandwagon.alpha,
                                  cfg.bandwagon.significant_only);
      write_figure_csv((out / (cfg.bandwagon.figure_file + ".csv")).string(), fig,
                       stamp);
      written.push_back(cfg.bandwagon.figure_file + ".csv");
      long feasible = 0;
      for (const auto& c : comparisons) feasible += c.feasible ? 1 : 0;
      log << "[bandwagon] " << comparisons.size() << " comparisons, " << feasible
          << " feasible\n";
    });
  }

  if (!cfg.simulations.empty()) {
    StageGuard{"simulate"}([&] {
      for (size_t si = 0; si < cfg.simulations.size(); ++si) {
        const SimulateConfig& sc = cfg.simulations[si];
        fs::path dir = out / ("sim_" + sc.name);
        fs::create_directories(dir);
        uint64_t sim_master = split_seed(cfg.seed, si);
        for (long rep = 0; rep < sc.reps; ++rep) {
          uint64_t rep_seed = split_seed(sim_master, static_cast<uint64_t>(rep));
          SimulatedPanel sim = simulate_panel(sc.dgp, rep_seed);
          std::string base = "rep" + std::to_string(rep);
          write_panel((dir / (base + ".csv")).string(), sim.panel, stamp);
          json truth;
          truth["config_hash"] = hash;
          truth["seed"] = sim.truth.seed;
          truth["beta_treat"] = num6(sim.truth.beta_treat);
          truth["beta_leader"] = num6(sim.truth.beta_leader);
          truth["endogeneity"] = num6(sim.truth.endogeneity);
          truth["treatment"] = sim.truth.treatment;
          write_json_file(dir / (base + "_truth.json"), truth);
          written.push_back("sim_" + sc.name + "/" + base + ".csv");
          written.push_back("sim_" + sc.name + "/" + base + "_truth.json");
        }
        log << "[simulate] " << sc.name << ": " << sc.reps << " replication(s)\n";
      }
    });
  }

  if (have_panel && cfg.emit_summary) {
    StageGuard{"summary"}([&] {
      write_summary_csv((out / "summary.csv").string(), summary_stats(panel), stamp);
      write_balance_csv((out / "balance.csv").string(),
                        balance_by_category_period(panel), stamp);
      written.push_back("summary.csv");
      written.push_back("balance.csv");
    });
  }

  manifest["artifacts"] = written;
  manifest["audits"] = audits;
  write_json_file(out / "manifest.json", manifest);
  written.push_back("manifest.json");
  return written;
}

}  // namespace draftiv
