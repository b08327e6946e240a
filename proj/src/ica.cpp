#include "modeplait/ica.hpp"

#include <cmath>
#include <random>

namespace modeplait {

namespace {

// W <- (W W^T)^(-1/2) W, so rows stay orthonormal after each update.
Eigen::MatrixXd symmetric_orthonormalize(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() *
         eig.eigenvectors().transpose() * w;
}

double row_skewness(const Eigen::RowVectorXd& row) {
  const double mean = row.mean();
  const Eigen::ArrayXd c = row.array() - mean;
  const double var = c.square().mean();
  if (var <= 0.0) return 0.0;
  return c.cube().mean() / std::pow(var, 1.5);
}

}  // namespace

WhitenResult center_whiten(const Eigen::MatrixXd& x) {
  const Eigen::Index d = x.rows(), n = x.cols();
  if (n <= d)
    throw DegenerateInputError("center_whiten: need more samples than dimensions");

  WhitenResult out;
  out.mean = x.rowwise().mean();
  const Eigen::MatrixXd centered = x.colwise() - out.mean;
  Eigen::MatrixXd cov = centered * centered.transpose() / static_cast<double>(n);
  cov = 0.5 * (cov + cov.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd& evals = eig.eigenvalues();
  const double lambda_max = evals[d - 1];
  if (lambda_max <= 0.0 || evals[0] < 1e-9 * lambda_max)
    throw DegenerateInputError("center_whiten: covariance numerically singular");

  const double ridge = 1e-10 * cov.trace() / static_cast<double>(d);
  const Eigen::VectorXd inv_sqrt =
      (evals.array() + ridge).sqrt().inverse().matrix();
  out.k_whiten =
      inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
  out.z = out.k_whiten * centered;
  return out;
}

IcaResult fixed_point_ica(const Eigen::MatrixXd& x, const IcaConfig& cfg) {
  const Eigen::Index d = x.rows(), n = x.cols();
  if (d < 1 || n < 2) throw DegenerateInputError("fixed_point_ica: empty input");
  if (!x.allFinite())
    throw std::invalid_argument("fixed_point_ica: non-finite input");

  IcaResult out;
  if (d == 1) {
    const double mean = x.row(0).mean();
    const double sd = std::sqrt((x.row(0).array() - mean).square().mean());
    if (sd <= 0.0) throw DegenerateInputError("fixed_point_ica: constant input");
    out.w = Eigen::MatrixXd::Constant(1, 1, 1.0 / sd);
    out.mean = Eigen::VectorXd::Constant(1, mean);
    out.e = out.w * (x.colwise() - out.mean);
    return out;
  }

  const WhitenResult white = center_whiten(x);

  // Deterministic random orthonormal start.
  std::mt19937 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd w_ica(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) w_ica(i, j) = gauss(rng);
  w_ica = symmetric_orthonormalize(w_ica);

  out.converged = false;
  for (int iter = 0; iter < cfg.max_iter; ++iter) {
    const Eigen::MatrixXd y = w_ica * white.z;  // d x n
    Eigen::MatrixXd gy(d, n);
    Eigen::VectorXd gprime_mean(d);
    if (cfg.contrast == IcaContrast::LogCosh) {
      gy = y.array().tanh().matrix();
      gprime_mean = (1.0 - gy.array().square()).rowwise().mean().matrix();
    } else {
      gy = y.array().cube().matrix();
      gprime_mean = (3.0 * y.array().square()).rowwise().mean().matrix();
    }
    Eigen::MatrixXd w_next =
        gy * white.z.transpose() / static_cast<double>(n) -
        gprime_mean.asDiagonal() * w_ica;
    w_next = symmetric_orthonormalize(w_next);

    const double delta =
        ((w_next * w_ica.transpose()).diagonal().cwiseAbs().array() - 1.0)
            .abs()
            .maxCoeff();
    w_ica = w_next;
    if (delta < cfg.tol) {
      out.converged = true;
      break;
    }
  }

  out.w = w_ica * white.k_whiten;
  out.mean = white.mean;
  out.e = out.w * (x.colwise() - out.mean);

  // Sign convention: non-negative skewness per component.
  for (Eigen::Index i = 0; i < d; ++i) {
    if (row_skewness(out.e.row(i)) < 0.0) {
      out.w.row(i) = -out.w.row(i);
      out.e.row(i) = -out.e.row(i);
    }
  }
  return out;
}

}  // namespace modeplait
