#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rsgd/restart.hpp"
#include "rsgd/schedule.hpp"

namespace rsgd {

/**
 * Iteration bookkeeping for the restart controller.
 *
 * Invariants: global_iteration == epoch_base + within_epoch_step at all times,
 * where epoch_base is the trigger iteration that started the current epoch
 * (the cumulative stopping time). The within-epoch counter resets to zero
 * exactly at trigger iterations; the iterate itself is carried forward
 * unchanged across a restart.
 */
struct OptimizerState {
  std::int64_t global_iteration = 0;  ///< k, number of steps taken
  std::int64_t within_epoch_step = 0; ///< s, feeds the learning-rate schedule
  std::int64_t restart_count = 0;     ///< j, epochs started
  std::int64_t epoch_base = 0;        ///< iteration at which the current epoch began
};

struct TrajectoryPoint {
  std::int64_t k;
  Eigen::VectorXd theta;
};

struct RunResult {
  Eigen::VectorXd theta;                        ///< final iterate
  std::vector<TrajectoryPoint> trajectory;      ///< recorded snapshots, increasing k
  std::vector<std::int64_t> restart_iterations; ///< triggers that actually fired
  OptimizerState state;                         ///< final counters
};

struct RunOptions {
  std::int64_t n_steps = 0;
  /// Record a snapshot every record_every steps (0 disables the cadence).
  /// The final iterate is always recorded; duplicates are not emitted.
  std::int64_t record_every = 0;
  /// Extra snapshot iterations (must be sorted ascending, values in [1, n_steps]).
  std::vector<std::int64_t> checkpoints;
  std::optional<RestartPolicy> restarts;
};

/**
 * Drives a stepper against a gradient oracle.
 *
 * Per step: alpha = schedule(s); grad = oracle(theta); theta = step(theta,
 * alpha, grad). If the completed iteration equals the next trigger, the
 * within-epoch counter resets to zero and the stepper is told to restart;
 * theta is never touched by a restart. Without a policy this is plain
 * SGD/AdaGrad. Oracle exceptions propagate; the partial trajectory is
 * discarded with the stack frame.
 *
 * Oracle requirements: dimension() and gradient(theta, out) writing a
 * gradient of matching dimension. Stepper requirements: step(theta, alpha,
 * grad) and on_restart().
 */
template <class Oracle, class Stepper>
RunResult run_optimizer(Oracle& oracle, Stepper& stepper, const Schedule& schedule,
                        const RunOptions& options, const Eigen::VectorXd& theta0) {
  if (options.n_steps < 1) throw std::invalid_argument("run_optimizer: n_steps must be >= 1");
  if (options.record_every < 0) {
    throw std::invalid_argument("run_optimizer: record_every must be >= 0");
  }
  if (!std::is_sorted(options.checkpoints.begin(), options.checkpoints.end())) {
    throw std::invalid_argument("run_optimizer: checkpoints must be sorted");
  }
  if (theta0.size() != oracle.dimension()) {
    throw std::invalid_argument("run_optimizer: theta0 dimension does not match oracle");
  }

  std::vector<std::int64_t> triggers;
  if (options.restarts) triggers = restart_trigger_iterations(*options.restarts, options.n_steps);

  RunResult result;
  result.theta = theta0;
  Eigen::VectorXd grad(oracle.dimension());
  OptimizerState st;
  std::size_t next_trigger = 0;
  std::size_t next_checkpoint = 0;
  std::int64_t last_recorded = -1;

  const auto record = [&](std::int64_t k) {
    if (k != last_recorded) {
      result.trajectory.push_back({k, result.theta});
      last_recorded = k;
    }
  };

  for (std::int64_t step = 1; step <= options.n_steps; ++step) {
    const double alpha = schedule.alpha(st.within_epoch_step);
    oracle.gradient(result.theta, grad);
    stepper.step(result.theta, alpha, grad);
    st.global_iteration = step;

    if (next_trigger < triggers.size() && step == triggers[next_trigger]) {
      st.within_epoch_step = 0;
      st.restart_count += 1;
      st.epoch_base = step;
      ++next_trigger;
      stepper.on_restart();
      result.restart_iterations.push_back(step);
    } else {
      st.within_epoch_step += 1;
    }

    while (next_checkpoint < options.checkpoints.size() &&
           options.checkpoints[next_checkpoint] == step) {
      record(step);
      ++next_checkpoint;
    }
    if (options.record_every > 0 && step % options.record_every == 0) record(step);
    if (step == options.n_steps) record(step);
  }

  result.state = st;
  return result;
}

}  // namespace rsgd
