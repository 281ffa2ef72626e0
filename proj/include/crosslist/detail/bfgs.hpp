#pragma once

#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace crosslist::detail {

struct BfgsOptions {
  int max_iterations = 500;
  double value_tolerance = 1e-8;  // on successive objective values
  int max_halvings = 50;
};

struct BfgsResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Quasi-Newton minimizer with an inverse-Hessian BFGS update and Armijo
/// backtracking. `objective(x, grad)` returns f(x), fills grad, and may
/// return a non-finite value to reject x. `inverse_hessian` seeds the
/// update and is restored whenever the search direction stops descending.
template <class Objective>
BfgsResult bfgs_minimize(Objective&& objective, Eigen::VectorXd x, const Eigen::MatrixXd& inverse_hessian,
                         const BfgsOptions& options = {}) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd grad(n), grad_new(n), x_new(n);
  double fx = objective(x, grad);

  BfgsResult result{x, fx, 0, false};
  if (!std::isfinite(fx)) return result;

  Eigen::MatrixXd h = inverse_hessian;
  bool fresh = true;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;
    Eigen::VectorXd dir = -h * grad;
    double slope = grad.dot(dir);
    if (!(slope < 0.0)) {
      h = inverse_hessian;
      fresh = true;
      dir = -h * grad;
      slope = grad.dot(dir);
      if (!(slope < 0.0)) {
        result.converged = grad.lpNorm<Eigen::Infinity>() < 1e-8;
        break;
      }
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int k = 0; k < options.max_halvings; ++k) {
      x_new = x + step * dir;
      f_new = objective(x_new, grad_new);
      if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (fresh) {
        // No progress even along the seeded direction: treat as stationary.
        result.converged = true;
        break;
      }
      h = inverse_hessian;
      fresh = true;
      continue;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = grad_new - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      h = (id - rho * s * y.transpose()) * h * (id - rho * y * s.transpose()) + rho * s * s.transpose();
      fresh = false;
    }

    const double decrease = fx - f_new;
    x = x_new;
    grad = grad_new;
    fx = f_new;
    if (decrease < options.value_tolerance) {
      result.converged = true;
      break;
    }
  }
  result.x = x;
  result.value = fx;
  return result;
}

}  // namespace crosslist::detail
