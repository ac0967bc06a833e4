#pragma once

#include <vector>

namespace draftiv {

// Two-sided p-value of a t statistic; NaN when dof <= 0 or t is not finite.
double t_two_sided_p(double t, double dof);

// Upper-tail p-value of an F statistic; 0 for an infinite statistic,
// NaN when a dof is <= 0.
double f_upper_p(double f, double df1, double df2);

// Standard normal quantile, e.g. 0.975 -> 1.95996.
double normal_quantile(double p);

// Linear-interpolation sample quantile (type 7) of an unsorted sample.
double quantile_type7(std::vector<double> values, double p);

}  // namespace draftiv
