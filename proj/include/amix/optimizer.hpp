#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace amix {

/// Returns f(x) and writes the gradient; +inf marks an infeasible point.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd& grad)>;

struct BoxOptions {
  int max_iters = 200;
  double gradient_tol = 1e-6;   // projected-gradient infinity norm
  double value_tol = 1e-9;      // relative decrease per iteration
  double max_step = 2.0;        // infinity-norm cap on a trial step
};

struct BoxResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
};

/// Projected BFGS with Armijo backtracking on the projected path. Variables
/// pinned at a bound with the gradient pushing outward are frozen for the
/// step. Throws std::domain_error if f(x0) is not finite.
BoxResult minimize_box(const Objective& f, Eigen::VectorXd x0, const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper, const BoxOptions& opts = {});

}  // namespace amix
