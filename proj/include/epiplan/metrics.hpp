#pragma once

#include <vector>

namespace epiplan {

/// Interquartile mean: drop the floor(n/4) smallest and largest values,
/// average the rest. Throws std::invalid_argument on an empty list.
double iqm(std::vector<double> values);

/// Population standard deviation of the same trimmed set iqm averages.
/// Throws std::invalid_argument on an empty list.
double iqr_std(std::vector<double> values);

/// 100 * (b - a) / b: how much smaller a is than the baseline b, in
/// percent. Throws std::domain_error unless b > 0.
double percent_reduction(double a_nodes, double b_nodes);

} // namespace epiplan
