#include <doctest.h>

#include "draftiv/formula.hpp"

using namespace draftiv;

TEST_CASE("formula_minimal") {
  FormulaSpec f = parse_formula("y ~ S");
  CHECK(f.response == "y");
  REQUIRE(f.terms.size() == 1);
  CHECK(f.terms[0].a == "S");
  CHECK(f.terms[0].b.empty());
  CHECK_FALSE(f.endogenous.has_value());
  CHECK(f.absorb.empty());
  CHECK(f.outcome.mode == OutcomeMode::LogRankPlus1);
  CHECK_FALSE(f.outcome.explicit_mode);
  CHECK(f.text == "y ~ S");
}

TEST_CASE("formula_full_clause_set") {
  FormulaSpec f = parse_formula(
      "y ~ age + age_sq + pre:drafter | fe: athlete event group"
      " | iv: D ~ z_loo | cluster: event"
      " | filter: groupsize<10, rankcap=250, dcap=15, noleader"
      " | outcome: centered shift=5");
  REQUIRE(f.terms.size() == 3);
  CHECK(f.terms[2].a == "pre");
  CHECK(f.terms[2].b == "drafter");
  CHECK(f.terms[2].name() == "pre:drafter");
  REQUIRE(f.endogenous.has_value());
  CHECK(*f.endogenous == "D");
  REQUIRE(f.instruments.size() == 1);
  CHECK(f.instruments[0] == "z_loo");
  REQUIRE(f.absorb.size() == 3);
  CHECK(f.absorb[0] == FactorKind::Athlete);
  CHECK(f.absorb[1] == FactorKind::Event);
  CHECK(f.absorb[2] == FactorKind::Group);
  REQUIRE(f.cluster.size() == 1);
  CHECK(f.cluster[0] == FactorKind::Event);
  CHECK(f.filters.group_size.pass(9));
  CHECK_FALSE(f.filters.group_size.pass(10));
  REQUIRE(f.outcome.rank_cap.has_value());
  CHECK(*f.outcome.rank_cap == 250.0);
  CHECK(f.filters.position_cap == 15);
  CHECK(f.filters.drop_leader_term);
  CHECK(f.outcome.mode == OutcomeMode::CenteredLog);
  CHECK(f.outcome.explicit_mode);
  CHECK(f.outcome.shift_c == 5.0);
}

TEST_CASE("formula_fe_only_rhs") {
  FormulaSpec f = parse_formula("y ~ 1 | fe: athlete event | iv: D ~ Z");
  CHECK(f.terms.empty());
  CHECK(f.endogenous.has_value());
}

TEST_CASE("formula_multiple_instruments") {
  FormulaSpec f = parse_formula("y ~ age | iv: D ~ z_loo + z_proj");
  REQUIRE(f.instruments.size() == 2);
  CHECK(f.instruments[1] == "z_proj");
}

TEST_CASE("formula_band_filter") {
  FormulaSpec f = parse_formula("y ~ 1 | iv: treat ~ z_loo | filter: band=1-2:3-4");
  REQUIRE(f.filters.band.has_value());
  CHECK(f.filters.band->low.lo == 1);
  CHECK(f.filters.band->low.hi == 2);
  CHECK(f.filters.band->high.lo == 3);
  CHECK(f.filters.band->high.hi == 4);
}

TEST_CASE("formula_outcome_modes") {
  CHECK(parse_formula("y ~ S | outcome: logrank").outcome.mode ==
        OutcomeMode::LogRankPlus1);
  CHECK(parse_formula("y ~ S | outcome: centered").outcome.mode ==
        OutcomeMode::CenteredLog);
  CHECK(parse_formula("total_s ~ S | outcome: raw").outcome.mode == OutcomeMode::Raw);
  CHECK(parse_formula("y ~ S | outcome: raw").outcome.explicit_mode);
  CHECK(parse_formula("y ~ S | outcome: centered shift=2 rankcap=100").outcome.shift_c ==
        2.0);
}

TEST_CASE("formula_group_cluster_alias") {
  FormulaSpec f = parse_formula("y ~ S | fe: cluster");
  REQUIRE(f.absorb.size() == 1);
  CHECK(f.absorb[0] == FactorKind::Group);
  FormulaSpec g = parse_formula("y ~ S | fe: eventgroup");
  CHECK(g.absorb[0] == FactorKind::EventGroup);
}

TEST_CASE("formula_errors_carry_position") {
  try {
    parse_formula("y + S");
    REQUIRE(false);
  } catch (const FormulaError& e) {
    CHECK(e.line == 1);
    CHECK(e.column == 3);
    CHECK(std::string(e.what()).find("'~'") != std::string::npos);
  }

  try {
    parse_formula("y ~ S | fe: athlete\n| iv: D");
    REQUIRE(false);
  } catch (const FormulaError& e) {
    CHECK(e.line == 2);  // second line of the formula
  }
}

TEST_CASE("formula_rejects_malformed") {
  CHECK_THROWS_AS(parse_formula(""), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | nope: x"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | fe:"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | fe: country"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | iv: D"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | filter: groupsize"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | filter: rankcap"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S | filter: band=1-3:2-4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_formula("y ~ S | outcome: hyperbolic"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S extra"), FormulaError);
  CHECK_THROWS_AS(parse_formula("y ~ S + "), FormulaError);
}

TEST_CASE("formula_validate_iv_pairing") {
  FormulaSpec f;
  f.response = "y";
  f.endogenous = "D";
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.endogenous.reset();
  f.instruments.push_back("z_loo");
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.endogenous = "D";
  CHECK_NOTHROW(f.validate());
}
