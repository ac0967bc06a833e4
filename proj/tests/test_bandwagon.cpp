#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "draftiv/bandwagon.hpp"
#include "draftiv/dgp.hpp"
#include "draftiv/stats.hpp"

using namespace draftiv;

namespace {

SimulatedPanel step_panel(uint64_t seed) {
  DgpConfig cfg;
  cfg.athletes = 300;
  cfg.events = 25;
  cfg.attendance = 0.85;
  cfg.paired_step_outcome = true;
  cfg.beta_treat = -0.4;
  cfg.endogeneity = 0.5;
  return simulate_panel(cfg, seed);
}

BandPair pair_of(int a, int b, int c, int d) {
  return BandPair{Band{a, b}, Band{c, d}};
}

BandComparison fake_comparison(const std::string& label, bool feasible,
                               double estimate, double pval) {
  BandComparison c;
  c.label = label;
  c.feasible = feasible;
  c.estimate = estimate;
  c.se = 0.1;
  c.ci_low = estimate - 0.2;
  c.ci_high = estimate + 0.2;
  c.pval = pval;
  c.pct_change = semi_elasticity(estimate);
  return c;
}

}  // namespace

TEST_CASE("default_ladder_walks_adjacent_pairs") {
  std::vector<BandPair> ladder = default_band_ladder();
  REQUIRE(ladder.size() == 7);
  CHECK(ladder.front().label() == "1-2 vs 3-4");
  CHECK(ladder.back().label() == "7-8 vs 9-10");
  for (size_t i = 0; i < ladder.size(); ++i) {
    CHECK(ladder[i].low.lo == static_cast<int>(i) + 1);
    CHECK(ladder[i].low.hi == ladder[i].low.lo + 1);
    CHECK(ladder[i].high.lo == ladder[i].low.lo + 2);
    CHECK(ladder[i].high.hi == ladder[i].low.lo + 3);
  }
}

TEST_CASE("band_contrast_recovers_the_injected_step") {
  SimulatedPanel sim = step_panel(501);
  std::vector<BandPair> pairs = {pair_of(1, 2, 3, 4), pair_of(3, 4, 5, 6),
                                 pair_of(5, 6, 7, 8)};
  BandwagonOptions opt;
  std::vector<BandComparison> out = run_band_comparisons(sim.panel, pairs, opt);
  REQUIRE(out.size() == 3);
  for (const auto& c : out) {
    REQUIRE(c.feasible);
    CHECK(c.ci_low <= -0.4);
    CHECK(c.ci_high >= -0.4);
    CHECK(c.n_obs == c.n_control + c.n_treated);
    CHECK(c.n_control > 0);
    CHECK(c.n_treated > 0);
  }
  CHECK(out[0].first_stage_f > 10.0);
}

TEST_CASE("comparison_fields_are_internally_consistent") {
  SimulatedPanel sim = step_panel(502);
  BandwagonOptions opt;
  opt.ci_level = 0.90;
  std::vector<BandComparison> out =
      run_band_comparisons(sim.panel, {pair_of(1, 2, 3, 4)}, opt);
  REQUIRE(out.size() == 1);
  const BandComparison& c = out[0];
  REQUIRE(c.feasible);
  CHECK(c.label == "1-2 vs 3-4");
  CHECK(c.pct_change ==
        doctest::Approx((std::exp(c.estimate) - 1.0) * 100.0).epsilon(1e-12));
  double crit = normal_quantile(0.95);
  CHECK(c.ci_low == doctest::Approx(c.estimate - crit * c.se).epsilon(1e-12));
  CHECK(c.ci_high == doctest::Approx(c.estimate + crit * c.se).epsilon(1e-12));
}

TEST_CASE("infeasible_band_is_reported_without_aborting_the_run") {
  SimulatedPanel sim = step_panel(503);
  std::vector<BandPair> pairs = {pair_of(1, 2, 3, 4), pair_of(30, 31, 32, 33)};
  std::vector<BandComparison> out =
      run_band_comparisons(sim.panel, pairs, BandwagonOptions{});
  REQUIRE(out.size() == 2);
  CHECK(out[0].feasible);
  CHECK_FALSE(out[1].feasible);
  CHECK(!out[1].note.empty());
  CHECK(out[1].label == "30-31 vs 32-33");
}

TEST_CASE("thread_count_does_not_change_the_estimates") {
  SimulatedPanel sim = step_panel(504);
  std::vector<BandPair> pairs = default_band_ladder();
  BandwagonOptions serial;
  serial.threads = 1;
  BandwagonOptions wide;
  wide.threads = 4;
  std::vector<BandComparison> a = run_band_comparisons(sim.panel, pairs, serial);
  std::vector<BandComparison> b = run_band_comparisons(sim.panel, pairs, wide);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].feasible == b[i].feasible);
    if (!a[i].feasible) continue;
    CHECK(a[i].estimate == b[i].estimate);
    CHECK(a[i].se == b[i].se);
    CHECK(a[i].n_obs == b[i].n_obs);
  }
}

TEST_CASE("group_size_filter_shrinks_the_sample") {
  SimulatedPanel sim = step_panel(505);
  BandwagonOptions open;
  BandwagonOptions strict;
  strict.group_size = GroupSizePredicate::parse(">=5");
  std::vector<BandComparison> a =
      run_band_comparisons(sim.panel, {pair_of(1, 2, 3, 4)}, open);
  std::vector<BandComparison> b =
      run_band_comparisons(sim.panel, {pair_of(1, 2, 3, 4)}, strict);
  REQUIRE(a[0].feasible);
  REQUIRE(b[0].feasible);
  CHECK(b[0].n_obs < a[0].n_obs);
}

TEST_CASE("figure_rows_filter_on_feasibility_and_significance") {
  std::vector<BandComparison> cs = {
      fake_comparison("1-2 vs 3-4", true, -0.5, 0.001),
      fake_comparison("2-3 vs 4-5", true, -0.1, 0.40),
      fake_comparison("3-4 vs 5-6", false, 0.0, 0.0)};

  std::vector<FigureRow> strict = emit_figure_data(cs);
  REQUIRE(strict.size() == 1);
  CHECK(strict[0].label == "1-2 vs 3-4");
  CHECK(strict[0].significant);
  CHECK(strict[0].pct_change == doctest::Approx(semi_elasticity(-0.5)).epsilon(1e-12));

  std::vector<FigureRow> all = emit_figure_data(cs, 0.05, false);
  REQUIRE(all.size() == 2);
  CHECK(all[0].significant);
  CHECK_FALSE(all[1].significant);

  std::vector<FigureRow> loose = emit_figure_data(cs, 1.0, true);
  CHECK(loose.size() == 2);

  CHECK(emit_figure_data({}).empty());
}

TEST_CASE("band_outputs_round_trip_through_csv") {
  std::vector<BandComparison> cs = {
      fake_comparison("1-2 vs 3-4", true, -0.5, 0.001),
      fake_comparison("5-6 vs 7-8", false, 0.0, 0.0)};
  cs[1].note = "control arm empty after filters";

  std::string table_path = "band_table_test.csv";
  std::string figure_path = "band_figure_test.csv";
  write_band_table(table_path, cs);
  write_figure_csv(figure_path, emit_figure_data(cs, 0.05, false));

  std::ifstream table(table_path);
  REQUIRE(table.good());
  std::string line;
  std::getline(table, line);
  CHECK(line ==
        "comparison,feasible,estimate,se,ci_low,ci_high,p_value,pct_change,"
        "first_stage_f,n_obs,n_control,n_treated,note");
  int rows = 0;
  bool note_seen = false;
  while (std::getline(table, line)) {
    ++rows;
    note_seen = note_seen || line.find("control arm empty") != std::string::npos;
  }
  CHECK(rows == 2);
  CHECK(note_seen);

  std::ifstream figure(figure_path);
  REQUIRE(figure.good());
  std::getline(figure, line);
  CHECK(line == "label,estimate,ci_low,ci_high,pct_change,significant");
  rows = 0;
  while (std::getline(figure, line)) ++rows;
  CHECK(rows == 1);

  std::remove(table_path.c_str());
  std::remove(figure_path.c_str());
}
