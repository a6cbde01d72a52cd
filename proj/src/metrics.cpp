#include "epiplan/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace epiplan {

namespace {

// The trimmed set shared by iqm and iqr_std; never empty for nonempty
// input because 2 * floor(n/4) < n.
std::vector<double> interquartile(std::vector<double> values,
                                  const char *caller) {
  if (values.empty())
    throw std::invalid_argument(std::string(caller) + ": empty list");
  std::sort(values.begin(), values.end());
  const std::size_t trim = values.size() / 4;
  return {values.begin() + trim, values.end() - trim};
}

double mean(const std::vector<double> &values) {
  double sum = 0;
  for (double v : values)
    sum += v;
  return sum / values.size();
}

} // namespace

double iqm(std::vector<double> values) {
  return mean(interquartile(std::move(values), "iqm"));
}

double iqr_std(std::vector<double> values) {
  const std::vector<double> trimmed =
      interquartile(std::move(values), "iqr_std");
  const double center = mean(trimmed);
  double acc = 0;
  for (double v : trimmed)
    acc += (v - center) * (v - center);
  return std::sqrt(acc / trimmed.size());
}

double percent_reduction(double a_nodes, double b_nodes) {
  if (!(b_nodes > 0))
    throw std::domain_error("percent_reduction: baseline must be positive");
  return 100.0 * (b_nodes - a_nodes) / b_nodes;
}

} // namespace epiplan
