#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace rsgd {

/// theta - alpha * grad. Dimensions must agree.
inline Eigen::VectorXd sgd_step(const Eigen::VectorXd& theta, double alpha,
                                const Eigen::VectorXd& grad) {
  if (theta.size() != grad.size()) {
    throw std::invalid_argument("sgd_step: dimension mismatch");
  }
  return theta - alpha * grad;
}

/**
 * Per-coordinate adaptive state.
 *
 * The accumulator starts at the all-ones vector, the same value the restart
 * controller resets it to, so a fresh run is indistinguishable from a run
 * restarted at iteration zero.
 */
struct AdaGradState {
  Eigen::VectorXd accumulator;  ///< G, componentwise non-decreasing between restarts
  double eta;
  double epsilon_guard;

  AdaGradState(Eigen::Index dim, double eta_, double epsilon_guard_ = 1e-12)
      : accumulator(Eigen::VectorXd::Ones(dim)), eta(eta_), epsilon_guard(epsilon_guard_) {
    if (!(eta > 0.0)) throw std::invalid_argument("AdaGradState: eta must be > 0");
    if (epsilon_guard < 0.0) {
      throw std::invalid_argument("AdaGradState: epsilon_guard must be >= 0");
    }
  }

  void reset() { accumulator.setOnes(); }
};

/**
 * G <- G + grad.^2; theta <- theta - eta * grad ./ sqrt(G + epsilon_guard).
 * Updates state and theta in place.
 */
inline void adagrad_step(AdaGradState& state, Eigen::VectorXd& theta,
                         const Eigen::VectorXd& grad) {
  if (theta.size() != grad.size() || state.accumulator.size() != grad.size()) {
    throw std::invalid_argument("adagrad_step: dimension mismatch");
  }
  state.accumulator.array() += grad.array().square();
  theta.array() -=
      state.eta * grad.array() / (state.accumulator.array() + state.epsilon_guard).sqrt();
}

/// Stepper adaptor used by run_optimizer: plain SGD, no internal state.
struct SgdStepper {
  void step(Eigen::VectorXd& theta, double alpha, const Eigen::VectorXd& grad) {
    theta.noalias() -= alpha * grad;
  }
  void on_restart() {}
};

/// Stepper adaptor used by run_optimizer: AdaGrad; a restart resets G to ones.
struct AdaGradStepper {
  AdaGradState state;

  AdaGradStepper(Eigen::Index dim, double eta, double epsilon_guard = 1e-12)
      : state(dim, eta, epsilon_guard) {}

  void step(Eigen::VectorXd& theta, double /*alpha*/, const Eigen::VectorXd& grad) {
    adagrad_step(state, theta, grad);
  }
  void on_restart() { state.reset(); }
};

}  // namespace rsgd
