#pragma once

// Small dense Levenberg-Marquardt solver for nonlinear least squares.

#include <Eigen/Dense>
#include <functional>

namespace modeplait {

struct LevMarOptions {
  double damping_init = 1e-3;
  double damping_factor = 2.0;
  int max_iter = 100;
  double rel_tol = 1e-6;  // relative residual-norm improvement tolerance
};

struct LevMarResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimizes ||r(x)||^2. `eval` fills the residual vector and Jacobian at x.
LevMarResult levenberg_marquardt(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                             Eigen::MatrixXd&)>& eval,
    const Eigen::VectorXd& x0, const LevMarOptions& opts = {});

}  // namespace modeplait
