#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rsgd {

/**
 * Deterministic trigger-iteration generator.
 *
 * Triggers depend only on iteration counts, never on the distance to the
 * minimizer: t_1 = first_trigger, t_{m+1} = max(t_m + 1, floor(growth * t_m)).
 * The max() guard keeps the sequence strictly increasing for any growth > 1,
 * so the gaps between consecutive triggers diverge.
 */
struct RestartPolicy {
  std::int64_t first_trigger;
  double growth_factor;

  RestartPolicy(std::int64_t first_trigger_, double growth_factor_)
      : first_trigger(first_trigger_), growth_factor(growth_factor_) {
    if (first_trigger <= 0) {
      throw std::invalid_argument("RestartPolicy: first_trigger must be positive");
    }
    if (!(growth_factor > 1.0)) {
      throw std::invalid_argument("RestartPolicy: growth_factor must be > 1");
    }
  }
};

/// All trigger iterations t <= n_max, strictly increasing.
inline std::vector<std::int64_t> restart_trigger_iterations(const RestartPolicy& policy,
                                                            std::int64_t n_max) {
  std::vector<std::int64_t> triggers;
  std::int64_t t = policy.first_trigger;
  while (t <= n_max) {
    triggers.push_back(t);
    const std::int64_t grown =
        static_cast<std::int64_t>(std::floor(policy.growth_factor * static_cast<double>(t)));
    t = std::max(t + 1, grown);
  }
  return triggers;
}

}  // namespace rsgd
