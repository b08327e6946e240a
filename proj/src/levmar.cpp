#include "modeplait/levmar.hpp"

#include <cmath>
#include <stdexcept>

namespace modeplait {

LevMarResult levenberg_marquardt(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&,
                             Eigen::MatrixXd&)>& eval,
    const Eigen::VectorXd& x0, const LevMarOptions& opts) {
  LevMarResult out;
  out.x = x0;

  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
  eval(out.x, residual, jacobian);
  if (!residual.allFinite())
    throw std::runtime_error("levenberg_marquardt: non-finite residuals");
  double cost = residual.squaredNorm();
  out.residual_norm = std::sqrt(cost);

  double damping = opts.damping_init;
  const Eigen::Index n = x0.size();

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    const Eigen::MatrixXd jtj = jacobian.transpose() * jacobian;
    const Eigen::VectorXd jtr = jacobian.transpose() * residual;
    if (jtr.norm() <= opts.rel_tol * (1.0 + out.residual_norm)) {
      out.converged = true;
      break;
    }

    Eigen::MatrixXd lhs = jtj;
    lhs.diagonal().array() += damping;
    const Eigen::VectorXd step = lhs.ldlt().solve(jtr);
    const Eigen::VectorXd x_trial = out.x - step;

    Eigen::VectorXd r_trial;
    Eigen::MatrixXd j_trial;
    eval(x_trial, r_trial, j_trial);
    if (!r_trial.allFinite())
      throw std::runtime_error("levenberg_marquardt: non-finite residuals");
    const double cost_trial = r_trial.squaredNorm();

    ++out.iterations;
    if (cost_trial < cost) {
      const double improvement = (cost - cost_trial) / (cost + 1e-300);
      out.x = x_trial;
      residual = r_trial;
      jacobian = j_trial;
      cost = cost_trial;
      out.residual_norm = std::sqrt(cost);
      damping = std::max(damping / opts.damping_factor, 1e-12);
      if (improvement < opts.rel_tol) {
        out.converged = true;
        break;
      }
    } else {
      damping *= opts.damping_factor;
      if (damping > 1e12) break;
    }
    (void)n;
  }
  return out;
}

}  // namespace modeplait
