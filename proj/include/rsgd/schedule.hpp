#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace rsgd {

/**
 * Learning-rate law. Two kinds:
 *   power_law : alpha_s = (s + 1)^(-p), p > 0 (strictly positive, non-increasing)
 *   constant  : alpha_s = value > 0
 *
 * `s` is the within-epoch step counter; the restart controller resets it to
 * zero at trigger iterations, which is what re-inflates the learning rate.
 */
class Schedule {
 public:
  enum class Kind { power_law, constant };

  static Schedule power_law(double exponent) {
    if (!(exponent > 0.0)) {
      throw std::invalid_argument("Schedule: power-law exponent must be > 0");
    }
    return Schedule(Kind::power_law, exponent);
  }

  static Schedule constant(double value) {
    if (!(value > 0.0)) {
      throw std::invalid_argument("Schedule: constant rate must be > 0");
    }
    return Schedule(Kind::constant, value);
  }

  double alpha(std::int64_t s) const {
    if (kind_ == Kind::constant) return param_;
    return std::pow(static_cast<double>(s) + 1.0, -param_);
  }

  double operator()(std::int64_t s) const { return alpha(s); }

  Kind kind() const { return kind_; }
  /// Power-law exponent p (power_law) or the fixed rate (constant).
  double parameter() const { return param_; }

 private:
  Schedule(Kind kind, double param) : kind_(kind), param_(param) {}

  Kind kind_;
  double param_;
};

/// alpha_s = (s+1)^(-p) for a power-law spec, or the constant value.
inline double schedule_alpha(const Schedule& spec, std::int64_t s) { return spec.alpha(s); }

/**
 * Classification of a schedule against the summability condition
 * (sum alpha_k = inf together with sum alpha_k^2 < inf):
 *
 *   satisfied       - both parts hold (power law with p in (0.5, 1])
 *   violated        - sum alpha_k converges, total movement is finite (p > 1)
 *   divergent_steps - sum alpha_k^2 diverges, per-step noise never dies
 *                     (power law with p <= 0.5, or any constant rate)
 *
 * The classification is analytic in the schedule parameters, never numeric.
 */
enum class RobbinsMonro { satisfied, violated, divergent_steps };

inline RobbinsMonro robbins_monro_check(const Schedule& spec) {
  if (spec.kind() == Schedule::Kind::constant) return RobbinsMonro::divergent_steps;
  const double p = spec.parameter();
  if (p > 1.0) return RobbinsMonro::violated;
  if (p > 0.5) return RobbinsMonro::satisfied;
  return RobbinsMonro::divergent_steps;
}

inline bool satisfies_robbins_monro(const Schedule& spec) {
  return robbins_monro_check(spec) == RobbinsMonro::satisfied;
}

}  // namespace rsgd
