#pragma once

// Fixed-point ICA: decompose a multivariate window into a demixing matrix W
// and mutually independent non-Gaussian inherent signals.

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace modeplait {

struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class IcaContrast { LogCosh, Cubic };

struct IcaConfig {
  int max_iter = 200;
  double tol = 1e-4;
  std::uint32_t seed = 0;
  IcaContrast contrast = IcaContrast::LogCosh;
};

struct WhitenResult {
  Eigen::MatrixXd z;         // whitened data, d x n
  Eigen::MatrixXd k_whiten;  // d x d, z = k_whiten * (x - mean)
  Eigen::VectorXd mean;      // d
};

struct IcaResult {
  Eigen::MatrixXd w;       // d x d demixing matrix; e = w * (x - mean)
  Eigen::MatrixXd e;       // d x n inherent signals
  Eigen::VectorXd mean;    // column mean removed before demixing
  bool converged = true;
};

// Remove the column mean and whiten so the sample covariance becomes the
// identity. A tiny ridge (1e-10 * trace/d) shields near-singular windows;
// genuinely rank-deficient input raises DegenerateInputError.
WhitenResult center_whiten(const Eigen::MatrixXd& x);

// Symmetric fixed-point ICA with deterministic seeded initialization.
// Rows of the result are sign-fixed so each component's skewness is
// non-negative. Non-convergence returns the best iterate with
// converged = false.
IcaResult fixed_point_ica(const Eigen::MatrixXd& x, const IcaConfig& cfg = {});

}  // namespace modeplait
