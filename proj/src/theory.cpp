#include "draftiv/theory.hpp"

#include <cmath>

namespace draftiv {

double benefit(double d, const GameParams& p) {
  p.validate();
  if (d < 1.0) throw std::invalid_argument("position must be >= 1");
  if (d <= 3.0) return 0.0;
  return p.gamma * (1.0 - std::exp(-p.lambda * (d - 3.0)));
}

double benefit_derivative(double d, const GameParams& p) {
  p.validate();
  if (d <= 3.0) return 0.0;
  return p.gamma * p.lambda * std::exp(-p.lambda * (d - 3.0));
}

double disutility(double d, const GameParams& p) {
  return p.alpha * p.cost_c * p.effort_e + (1.0 - p.alpha) * (p.mu - benefit(d, p));
}

int optimal_position(const GameParams& p, int d_max) {
  if (d_max < 1) throw std::invalid_argument("d_max must be >= 1");
  p.validate();
  // Comparing disutilities through B(d) = gamma*(1 - e^{-lambda(d-3)}) loses
  // the exponential tail to absorption once it drops below machine epsilon,
  // which would tie deep positions that are strictly ordered. Comparing the
  // tails themselves keeps the ordering exact for any representable exponent.
  auto tail = [&](int d) {
    return d <= 3 ? 1.0 : std::exp(-p.lambda * (static_cast<double>(d) - 3.0));
  };
  int best = 1;
  for (int d = 2; d <= d_max; ++d) {
    double diff = (1.0 - p.alpha) * p.gamma * (tail(d) - tail(best));
    if (diff < 0.0) best = d;
  }
  return best;
}

}  // namespace draftiv
