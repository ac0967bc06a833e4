#pragma once

#include <stdexcept>

namespace draftiv {

// Structural parameters of the two-stage positioning game.
struct GameParams {
  double gamma = 1.0;    // maximum drafting benefit
  double lambda = 0.5;   // benefit growth rate
  double alpha = 0.5;    // weight on effort vs. outcome, in [0,1]
  double cost_c = 1.0;   // marginal effort cost
  double mu = 1.0;       // reference utility level
  double effort_e = 1.0; // fixed first-stage effort

  void validate() const {
    if (!(gamma > 0)) throw std::invalid_argument("gamma must be > 0");
    if (!(lambda > 0)) throw std::invalid_argument("lambda must be > 0");
    if (!(alpha >= 0 && alpha <= 1)) throw std::invalid_argument("alpha must be in [0,1]");
    if (!(cost_c > 0)) throw std::invalid_argument("cost_c must be > 0");
    if (!(effort_e >= 0)) throw std::invalid_argument("effort_e must be >= 0");
  }
};

// Drafting benefit: 0 through position 3, then a saturating exponential
// approaching gamma. Continuous positions are accepted for the relaxation.
double benefit(double d, const GameParams& p);

// Marginal benefit; 0 on the flat region d <= 3.
double benefit_derivative(double d, const GameParams& p);

// alpha*c*e + (1-alpha)*(mu - B(d)): effort cost plus performance shortfall
// net of the drafting gain.
double disutility(double d, const GameParams& p);

// Exhaustive argmin of disutility over positions 1..d_max, ties toward the
// smaller position. With alpha < 1 and d_max > 3 this lands on d_max since
// disutility is strictly decreasing past the flat region.
int optimal_position(const GameParams& p, int d_max);

}  // namespace draftiv
