#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace scr {

struct OptimResult {
  Eigen::VectorXd x;
  double f = 0;
  Eigen::VectorXd grad;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

using ObjFn = std::function<double(const Eigen::VectorXd&)>;
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// BFGS with backtracking line search; stops when the sup-norm of the
// gradient drops below tol_grad.
OptimResult bfgs_minimize(const ObjFn& f, const GradFn& grad, const Eigen::VectorXd& x0,
                          double tol_grad, int max_iter);

// Central finite differences of a gradient, symmetrized; step per coordinate
// is max(base_step, base_step * |x_j|).
Eigen::MatrixXd fd_jacobian_symmetric(const GradFn& grad, const Eigen::VectorXd& x,
                                      double base_step);

}  // namespace scr
