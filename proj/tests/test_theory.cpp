#include <doctest.h>

#include <cmath>
#include <random>

#include "draftiv/theory.hpp"

using namespace draftiv;

TEST_CASE("benefit_closed_forms") {
  GameParams p;  // gamma=1, lambda=0.5
  CHECK(benefit(1, p) == 0.0);
  CHECK(benefit(2, p) == 0.0);
  CHECK(benefit(3, p) == 0.0);
  CHECK(benefit(4, p) == doctest::Approx(1.0 - std::exp(-0.5)).epsilon(1e-12));
  CHECK(benefit(4, p) == doctest::Approx(0.393469).epsilon(1e-6));
  CHECK(std::abs(benefit(100, p) - 1.0) < 1e-12);

  GameParams q;
  q.gamma = 2.5;
  q.lambda = 0.2;
  CHECK(benefit(7, q) == doctest::Approx(2.5 * (1.0 - std::exp(-0.2 * 4))).epsilon(1e-12));
  CHECK_THROWS_AS(benefit(0.5, p), std::invalid_argument);
}

TEST_CASE("benefit_monotone_concave_on_grid") {
  GameParams p;
  p.gamma = 1.7;
  p.lambda = 0.35;
  double lo = 3.0, hi = 60.0;
  int n = 500;
  double prev = benefit(lo, p);
  for (int i = 1; i <= n; ++i) {
    double d = lo + (hi - lo) * i / n;
    double b = benefit(d, p);
    CHECK(b > prev);  // strictly increasing past the flat region
    CHECK(b < p.gamma);
    prev = b;
  }
  // midpoint concavity
  std::mt19937_64 rng(5150);
  std::uniform_real_distribution<double> u(3.0 + 1e-6, 60.0);
  for (int i = 0; i < 500; ++i) {
    double a = u(rng), b = u(rng);
    double mid = benefit(0.5 * (a + b), p);
    CHECK(mid >= 0.5 * (benefit(a, p) + benefit(b, p)) - 1e-12);
  }
}

TEST_CASE("benefit_derivative_matches_finite_differences") {
  GameParams p;
  CHECK(benefit_derivative(4, p) == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-12));
  CHECK(benefit_derivative(4, p) == doctest::Approx(0.303265).epsilon(1e-5));
  CHECK(benefit_derivative(3, p) == 0.0);
  CHECK(benefit_derivative(2, p) == 0.0);
  CHECK(benefit_derivative(10, p) < benefit_derivative(4, p));

  GameParams q;
  q.gamma = 2.0;
  q.lambda = 0.8;
  double h = 1e-5;
  // Close to the kink the curve is far from saturation and a plain central
  // difference of benefit() is clean.
  for (double d = 3.01; q.lambda * (d - 3.0) <= 8.0; d += 0.37) {
    double fd = (benefit(d + h, q) - benefit(d - h, q)) / (2 * h);
    double an = benefit_derivative(d, q);
    CHECK(std::abs(an - fd) / std::max(std::abs(an), 1e-300) < 1e-6);
  }
  // Deeper in, differencing the whole function cancels catastrophically, so
  // difference the tail gamma*e^{-lambda(d-3)} instead: it equals
  // gamma - benefit(d) analytically, and stays fully precise at depth.
  auto tail = [&](double d) { return q.gamma * std::exp(-q.lambda * (d - 3.0)); };
  for (double d = 3.01; d <= 50.0; d += 0.37) {
    CHECK(benefit(d, q) == doctest::Approx(q.gamma - tail(d)).epsilon(1e-12));
    double fd = -(tail(d + h) - tail(d - h)) / (2 * h);
    double an = benefit_derivative(d, q);
    CHECK(std::abs(an - fd) / std::max(std::abs(an), 1e-300) < 1e-6);
  }
}

TEST_CASE("disutility_closed_forms") {
  GameParams p;
  p.alpha = 1.0;
  p.cost_c = 2.0;
  p.effort_e = 3.0;
  for (int d : {1, 3, 5, 20}) CHECK(disutility(d, p) == doctest::Approx(6.0).epsilon(1e-12));

  GameParams q;
  q.alpha = 0.0;
  q.mu = 1.0;
  CHECK(disutility(3, q) == doctest::Approx(1.0).epsilon(1e-12));

  GameParams r;
  r.alpha = 0.5;
  r.cost_c = 1.0;
  r.effort_e = 2.0;
  r.gamma = 1.0;
  r.lambda = 0.5;
  r.mu = 1.0;
  CHECK(disutility(4, r) == doctest::Approx(1.0 + 0.5 * (1.0 - 0.393469)).epsilon(1e-6));
  CHECK(disutility(4, r) == doctest::Approx(1.303265).epsilon(1e-6));
}

TEST_CASE("disutility_decreasing_past_flat_region") {
  GameParams p;
  double prev = disutility(3, p);
  for (int d = 4; d <= 40; ++d) {
    double cur = disutility(d, p);
    CHECK(cur < prev);
    prev = cur;
  }
  double limit = p.alpha * p.cost_c * p.effort_e + (1 - p.alpha) * (p.mu - p.gamma);
  CHECK(disutility(400, p) == doctest::Approx(limit).epsilon(1e-9));
}

TEST_CASE("optimal_position_examples") {
  GameParams p;  // alpha=0.5 < 1
  CHECK(optimal_position(p, 8) == 8);
  CHECK(optimal_position(p, 3) == 1);  // benefit identically zero, ties -> smallest
  CHECK(optimal_position(p, 1) == 1);

  GameParams flat;
  flat.alpha = 1.0;
  CHECK(optimal_position(flat, 8) == 1);
  CHECK(optimal_position(flat, 25) == 1);
}

TEST_CASE("optimal_position_is_brute_force_argmin") {
  std::mt19937_64 rng(321);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    GameParams p;
    p.gamma = 0.1 + 3.0 * u01(rng);
    p.lambda = 0.05 + 2.0 * u01(rng);
    p.alpha = u01(rng);
    p.cost_c = 0.1 + 2.0 * u01(rng);
    p.mu = u01(rng) * 2.0;
    p.effort_e = u01(rng) * 2.0;
    int d_max = 1 + static_cast<int>(rng() % 64);

    // Where the between-position disutility increments stay representable,
    // a plain float argmin over disutility() is a fully independent check.
    if (p.lambda * (d_max - 3) < 30.0) {
      int best = 1;
      for (int d = 2; d <= d_max; ++d)
        if (disutility(d, p) < disutility(best, p)) best = d;
      CHECK(optimal_position(p, d_max) == best);
    }
    // The exact argmin is known in closed form: disutility is strictly
    // decreasing past position 3 whenever outcome weight is positive.
    int expected = (p.alpha < 1.0 && d_max > 3) ? d_max : 1;
    CHECK(optimal_position(p, d_max) == expected);
  }
}

TEST_CASE("params_validation") {
  GameParams p;
  p.gamma = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = GameParams{};
  p.lambda = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = GameParams{};
  p.alpha = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = GameParams{};
  p.cost_c = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
