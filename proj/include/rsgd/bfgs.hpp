#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rsgd/runner.hpp"

namespace rsgd {

struct BFGSConfig {
  double alpha0 = 1.0;        ///< maximal line-search step
  double backtrack_rho = 0.5; ///< step shrink factor per backtrack
  double armijo_c = 1e-4;     ///< sufficient-decrease parameter
  double grad_tol = 1e-8;     ///< terminate when ||grad|| < grad_tol
  int max_iters = 200;
  int max_backtracks = 60;

  void validate() const {
    if (!(alpha0 > 0.0)) throw std::invalid_argument("BFGSConfig: alpha0 must be > 0");
    if (!(backtrack_rho > 0.0 && backtrack_rho < 1.0)) {
      throw std::invalid_argument("BFGSConfig: backtrack_rho must be in (0, 1)");
    }
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) {
      throw std::invalid_argument("BFGSConfig: armijo_c must be in (0, 1)");
    }
    if (!(grad_tol > 0.0)) throw std::invalid_argument("BFGSConfig: grad_tol must be > 0");
    if (max_iters < 1) throw std::invalid_argument("BFGSConfig: max_iters must be >= 1");
  }
};

enum class BfgsStatus { converged, max_iterations, line_search_failed };

struct BfgsResult {
  Eigen::VectorXd theta;
  BfgsStatus status = BfgsStatus::max_iterations;
  int iterations = 0;
  double objective = 0.0;
  double grad_norm = 0.0;
  std::vector<TrajectoryPoint> trajectory;  ///< iterate recorded after every iteration
};

/// Armijo backtracking: step lengths alpha0 * rho^m until sufficient decrease.
/// Returns 0 on failure after max_backtracks shrinks.
struct ArmijoLineSearch {
  double alpha0;
  double rho;
  double c;
  int max_backtracks;

  template <class F>
  double operator()(F&& objective, const Eigen::VectorXd& x, double fx,
                    const Eigen::VectorXd& direction, double directional_derivative) const {
    double t = alpha0;
    for (int m = 0; m <= max_backtracks; ++m) {
      const double f_new = objective(x + t * direction);
      if (f_new <= fx + c * t * directional_derivative) return t;
      t *= rho;
    }
    return 0.0;
  }
};

/**
 * Dense BFGS on the inverse Hessian with a pluggable line search.
 *
 * The line search receives (objective, x, f(x), direction, g'p) and returns a
 * step length, or 0 to signal failure. Curvature pairs with s'y <= 0 skip the
 * update; the first accepted pair rescales H by s'y / y'y before updating.
 */
template <class F, class G, class LineSearch>
BfgsResult bfgs_minimize_with_line_search(F&& objective, G&& gradient,
                                          const Eigen::VectorXd& theta0,
                                          const BFGSConfig& config, LineSearch&& line_search) {
  config.validate();
  const Eigen::Index n = theta0.size();

  BfgsResult result;
  result.theta = theta0;
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd grad = gradient(result.theta);
  if (grad.size() != n) throw std::invalid_argument("bfgs: gradient dimension mismatch");
  double fx = objective(result.theta);
  bool first_update = true;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    result.grad_norm = grad.norm();
    if (result.grad_norm < config.grad_tol) {
      result.status = BfgsStatus::converged;
      break;
    }

    const Eigen::VectorXd direction = -(h_inv * grad);
    const double slope = grad.dot(direction);
    const double step = line_search(objective, result.theta, fx, direction, slope);
    if (step == 0.0) {
      result.status = BfgsStatus::line_search_failed;
      break;
    }

    const Eigen::VectorXd s = step * direction;
    result.theta += s;
    const Eigen::VectorXd grad_new = gradient(result.theta);
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (first_update) {
        h_inv *= sy / y.dot(y);
        first_update = false;
      }
      const double inv_sy = 1.0 / sy;
      const Eigen::VectorXd hy = h_inv * y;
      // H <- (I - rho s y') H (I - rho y s') + rho s s'
      h_inv.noalias() -= inv_sy * (hy * s.transpose() + s * hy.transpose());
      h_inv.noalias() += (inv_sy * inv_sy * (y.dot(hy)) + inv_sy) * (s * s.transpose());
    }
    grad = grad_new;
    fx = objective(result.theta);
    result.iterations = iter + 1;
    result.trajectory.push_back({result.iterations, result.theta});
  }

  result.objective = fx;
  result.grad_norm = grad.norm();
  if (result.grad_norm < config.grad_tol) result.status = BfgsStatus::converged;
  return result;
}

/// BFGS with the standard Armijo backtracking line search.
template <class F, class G>
BfgsResult bfgs_minimize(F&& objective, G&& gradient, const Eigen::VectorXd& theta0,
                         const BFGSConfig& config = {}) {
  ArmijoLineSearch ls{config.alpha0, config.backtrack_rho, config.armijo_c,
                      config.max_backtracks};
  return bfgs_minimize_with_line_search(objective, gradient, theta0, config, ls);
}

}  // namespace rsgd
