#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "draftiv/report.hpp"
#include "draftiv/stats.hpp"

using namespace draftiv;

namespace {

PanelRow swim_row(const std::string& aid, double swim, EventCategory cat,
                  Period period) {
  PanelRow r;
  r.athlete_id = aid;
  r.event_id = "E1";
  r.swim_out_s = swim;
  r.total_s = swim * 4;
  r.rank = 1;
  r.category = cat;
  r.period = period;
  return r;
}

NamedResult fake_result(const std::string& name, double coef, double se,
                        double pval) {
  RegressionResult r;
  r.coefs.names = {"S"};
  r.coefs.coef = Eigen::VectorXd::Constant(1, coef);
  r.coefs.se = Eigen::VectorXd::Constant(1, se);
  r.coefs.tstat = Eigen::VectorXd::Constant(1, coef / se);
  r.coefs.pval = Eigen::VectorXd::Constant(1, pval);
  r.stats.n = 1234;
  r.stats.within_r2 = 0.25;
  r.stats.adj_r2 = 0.5;
  r.stats.rmse = 0.75;
  r.cov = CovarianceSpec::parse("hc1");
  r.absorbed_levels["athlete"] = 77;
  return named_ols(name, r, "y ~ S");
}

}  // namespace

TEST_CASE("quantile_type7_interpolates") {
  std::vector<double> v = {1, 2, 3, 4};
  CHECK(quantile_type7(v, 0.0) == 1.0);
  CHECK(quantile_type7(v, 0.25) == doctest::Approx(1.75).epsilon(1e-12));
  CHECK(quantile_type7(v, 0.5) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(quantile_type7(v, 1.0) == 4.0);
  CHECK(quantile_type7({5, 1, 3}, 0.5) == 3.0);
}

TEST_CASE("summary_stats_on_known_values") {
  Panel panel;
  for (int i = 1; i <= 5; ++i)
    panel.push_back(swim_row("A" + std::to_string(i), i, EventCategory::Sprint,
                             Period::Pre));
  std::vector<NumericSummary> rows = summary_stats(panel);
  const NumericSummary* swim = nullptr;
  const NumericSummary* pos = nullptr;
  for (const auto& s : rows) {
    if (s.column == "swim_out_s") swim = &s;
    if (s.column == "position") pos = &s;
  }
  REQUIRE(swim != nullptr);
  CHECK(swim->n == 5);
  CHECK(swim->min == 1.0);
  CHECK(swim->q1 == 2.0);
  CHECK(swim->median == 3.0);
  CHECK(swim->mean == 3.0);
  CHECK(swim->q3 == 4.0);
  CHECK(swim->max == 5.0);
  // Position was never assigned, so the whole column counts as missing.
  REQUIRE(pos != nullptr);
  CHECK(pos->n == 0);
}

TEST_CASE("summary_stats_skip_missing_values") {
  Panel panel;
  for (int i = 1; i <= 4; ++i)
    panel.push_back(swim_row("A" + std::to_string(i), i, EventCategory::Sprint,
                             Period::Pre));
  panel[1].rank = std::numeric_limits<double>::quiet_NaN();
  panel[3].rank = std::numeric_limits<double>::quiet_NaN();
  for (const auto& s : summary_stats(panel)) {
    if (s.column == "rank") {
      CHECK(s.n == 2);
      CHECK(s.mean == 1.0);
    }
  }
}

TEST_CASE("balance_cells_in_enum_order_with_sample_sd") {
  Panel panel;
  panel.push_back(swim_row("A1", 100, EventCategory::Long, Period::Post));
  panel.push_back(swim_row("A2", 104, EventCategory::Long, Period::Post));
  panel.push_back(swim_row("A3", 50, EventCategory::Sprint, Period::Pre));
  panel.push_back(swim_row("A4", 60, EventCategory::Sprint, Period::Covid));
  std::vector<BalanceRow> rows = balance_by_category_period(panel);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].category == EventCategory::Sprint);
  CHECK(rows[0].period == Period::Pre);
  CHECK(rows[0].n == 1);
  CHECK(rows[0].mean_swim == 50.0);
  CHECK(rows[0].sd_swim == 0.0);
  CHECK(rows[1].category == EventCategory::Sprint);
  CHECK(rows[1].period == Period::Covid);
  CHECK(rows[2].category == EventCategory::Long);
  CHECK(rows[2].period == Period::Post);
  CHECK(rows[2].n == 2);
  CHECK(rows[2].mean_swim == doctest::Approx(102.0).epsilon(1e-12));
  CHECK(rows[2].sd_swim == doctest::Approx(std::sqrt(8.0)).epsilon(1e-12));
}

TEST_CASE("star_thresholds_by_convention") {
  CHECK(star_marker(0.005, StarConvention::Coarse) == "***");
  CHECK(star_marker(0.005, StarConvention::Fine) == "**");
  CHECK(star_marker(0.0005, StarConvention::Fine) == "***");
  CHECK(star_marker(0.02, StarConvention::Coarse) == "**");
  CHECK(star_marker(0.02, StarConvention::Fine) == "*");
  CHECK(star_marker(0.07, StarConvention::Coarse) == "*");
  CHECK(star_marker(0.07, StarConvention::Fine) == "");
  CHECK(star_marker(0.01, StarConvention::Coarse) == "**");
  CHECK(star_marker(0.5, StarConvention::Coarse) == "");
  CHECK(star_marker(std::numeric_limits<double>::quiet_NaN(),
                    StarConvention::Coarse) == "");
}

TEST_CASE("coefficient_cells_show_estimate_stars_and_se") {
  std::vector<NamedResult> results = {fake_result("main", -0.972, 0.185, 1e-5)};
  TableLayout layout;
  layout.stars = StarConvention::Coarse;
  std::string md = render_table(results, layout, TableFormat::Markdown);
  CHECK(md.find("-0.972*** (0.185)") != std::string::npos);
  CHECK(md.find("1234") != std::string::npos);
  CHECK(md.find("FE athlete levels") != std::string::npos);
  CHECK(md.find("hc1") != std::string::npos);

  std::vector<NamedResult> border = {fake_result("main", -0.972, 0.185, 0.005)};
  layout.stars = StarConvention::Coarse;
  std::string coarse = render_table(border, layout, TableFormat::Markdown);
  CHECK(coarse.find("-0.972*** (0.185)") != std::string::npos);
  layout.stars = StarConvention::Fine;
  std::string fine = render_table(border, layout, TableFormat::Markdown);
  CHECK(fine.find("-0.972** (0.185)") != std::string::npos);
  CHECK(fine.find("-0.972***") == std::string::npos);
}

TEST_CASE("table_columns_follow_the_layout_order") {
  std::vector<NamedResult> results = {fake_result("a", 1.0, 0.1, 0.5),
                                      fake_result("b", 2.0, 0.2, 0.5)};
  TableLayout layout;
  layout.columns = {"b", "a"};
  layout.diagnostics = false;
  std::string csv = render_table(results, layout, TableFormat::Csv);
  CHECK(csv.find(",b,a") != std::string::npos);
  CHECK(csv.find("2.000") < csv.find("1.000"));

  layout.columns = {"zzz"};
  CHECK_THROWS_WITH_AS(render_table(results, layout, TableFormat::Csv),
                       doctest::Contains("unknown specification"),
                       std::invalid_argument);
}

TEST_CASE("iv_diagnostics_rows_appear_when_any_column_is_iv") {
  NamedResult plain = fake_result("ols", -0.4, 0.1, 0.001);
  NamedResult iv = fake_result("iv", -0.5, 0.2, 0.01);
  iv.is_iv = true;
  iv.first.f_excluded = 123.46;
  iv.wu_hausman_p = 0.031;
  std::vector<NamedResult> results = {plain, iv};
  std::string md = render_table(results, TableLayout{}, TableFormat::Markdown);
  CHECK(md.find("First-stage F") != std::string::npos);
  CHECK(md.find("123.5") != std::string::npos);
  CHECK(md.find("Wu-Hausman p") != std::string::npos);
  CHECK(md.find("0.031") != std::string::npos);

  iv.wu_hausman_degenerate = true;
  std::string degen =
      render_table({plain, iv}, TableLayout{}, TableFormat::Markdown);
  CHECK(degen.find("degenerate") != std::string::npos);

  std::string no_iv = render_table({plain}, TableLayout{}, TableFormat::Markdown);
  CHECK(no_iv.find("First-stage F") == std::string::npos);
}

TEST_CASE("render_is_deterministic_across_calls") {
  std::vector<NamedResult> results = {fake_result("a", 1.5, 0.3, 0.04),
                                      fake_result("b", -2.5, 0.7, 0.2)};
  TableLayout layout;
  layout.title = "Main contrasts";
  std::string one = render_table(results, layout, TableFormat::Csv);
  std::string two = render_table(results, layout, TableFormat::Csv);
  CHECK(one == two);
  CHECK(one.find("# Main contrasts") != std::string::npos);
  std::string md1 = render_table(results, layout, TableFormat::Markdown);
  std::string md2 = render_table(results, layout, TableFormat::Markdown);
  CHECK(md1 == md2);
  CHECK(md1 != one);
}

TEST_CASE("summary_and_balance_files_have_stable_headers") {
  Panel panel;
  panel.push_back(swim_row("A1", 100, EventCategory::Short, Period::Covid));
  panel.push_back(swim_row("A2", 110, EventCategory::Short, Period::Covid));

  std::string sum_path = "report_summary_test.csv";
  std::string bal_path = "report_balance_test.csv";
  write_summary_csv(sum_path, summary_stats(panel));
  write_balance_csv(bal_path, balance_by_category_period(panel));

  std::ifstream sum(sum_path);
  REQUIRE(sum.good());
  std::string line;
  std::getline(sum, line);
  CHECK(line == "column,n,min,q1,median,mean,q3,max");

  std::ifstream bal(bal_path);
  REQUIRE(bal.good());
  std::getline(bal, line);
  CHECK(line == "category,period,mean_swim_s,sd_swim_s,n");
  std::getline(bal, line);
  CHECK(line == "Short,Covid,105,7.07107,2");

  std::remove(sum_path.c_str());
  std::remove(bal_path.c_str());
}
