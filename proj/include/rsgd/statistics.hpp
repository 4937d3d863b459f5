#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace rsgd {

/// Summary of final errors over a batch of independent runs.
struct RunStatistics {
  double mean = 0.0;
  double median = 0.0;
  double variance = 0.0;  ///< sample variance (n - 1 denominator; 0 for n == 1)
  double max = 0.0;
  double min = 0.0;
  double fraction_below_delta = 0.0;
};

inline RunStatistics summarize_errors(std::vector<double> errors, double delta) {
  if (errors.empty()) throw std::invalid_argument("summarize_errors: empty sample");
  RunStatistics stats;
  const std::size_t n = errors.size();
  double sum = 0.0;
  std::size_t below = 0;
  for (const double e : errors) {
    sum += e;
    if (e <= delta) ++below;
  }
  stats.mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (const double e : errors) ss += (e - stats.mean) * (e - stats.mean);
  stats.variance = n > 1 ? ss / static_cast<double>(n - 1) : 0.0;
  std::sort(errors.begin(), errors.end());
  stats.min = errors.front();
  stats.max = errors.back();
  stats.median = (n % 2 == 1) ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
  stats.fraction_below_delta = static_cast<double>(below) / static_cast<double>(n);
  return stats;
}

}  // namespace rsgd
