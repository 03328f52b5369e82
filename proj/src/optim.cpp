#include "scr/optim.hpp"

#include <cmath>

namespace scr {

OptimResult bfgs_minimize(const ObjFn& f, const GradFn& grad, const Eigen::VectorXd& x0,
                          double tol_grad, int max_iter) {
  const Eigen::Index n = x0.size();
  OptimResult res;
  res.x = x0;
  res.f = f(res.x);
  res.grad = grad(res.x);
  Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);

  int stalled = 0;
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    if (res.grad.lpNorm<Eigen::Infinity>() < tol_grad) {
      res.converged = true;
      return res;
    }
    Eigen::VectorXd dir = -(h_inv * res.grad);
    double slope = dir.dot(res.grad);
    if (!(slope < 0)) {  // lost curvature, restart from steepest descent
      h_inv.setIdentity();
      dir = -res.grad;
      slope = dir.dot(res.grad);
    }
    double step = 1.0;
    double f_new = 0;
    Eigen::VectorXd x_new;
    bool ok = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = res.x + step * dir;
      f_new = f(x_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * step * slope) {
        ok = true;
        break;
      }
      step *= 0.5;
    }
    if (!ok) {
      res.message = "line search failed";
      return res;
    }
    const Eigen::VectorXd g_new = grad(x_new);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
      const Eigen::MatrixXd v = id - rho * s * y.transpose();
      h_inv = v * h_inv * v.transpose() + rho * s * s.transpose();
    } else {
      h_inv.setIdentity();
    }
    stalled = std::abs(f_new - res.f) <= 1e-13 * (std::abs(f_new) + 1.0) ? stalled + 1 : 0;
    res.x = x_new;
    res.f = f_new;
    res.grad = g_new;
    if (stalled >= 3) {  // leave the rest of the budget to the caller
      ++res.iterations;
      res.message = "progress stalled";
      break;
    }
  }
  if (res.message.empty()) res.message = "iteration limit reached";
  res.converged = res.grad.lpNorm<Eigen::Infinity>() < tol_grad;
  return res;
}

Eigen::MatrixXd fd_jacobian_symmetric(const GradFn& grad, const Eigen::VectorXd& x,
                                      double base_step) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd j(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double h = std::max(base_step, base_step * std::fabs(x[k]));
    Eigen::VectorXd xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    j.col(k) = (grad(xp) - grad(xm)) / (2.0 * h);
  }
  return 0.5 * (j + j.transpose());
}

}  // namespace scr
