#include "modeplait/mode_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace modeplait {

namespace {

// Gavish-Donoho omega(beta) approximation for the unknown-noise-level case.
double hard_threshold_coefficient(double beta) {
  return 0.56 * beta * beta * beta - 0.95 * beta * beta + 1.82 * beta + 1.43;
}

double median_of_sorted_desc(const Eigen::VectorXd& v) {
  const Eigen::Index n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

int optimal_rank(const Eigen::VectorXd& singular_values, Eigen::Index rows,
                 Eigen::Index cols) {
  if (singular_values.size() == 0 || singular_values.maxCoeff() <= 0.0)
    throw std::invalid_argument("optimal_rank: all-zero singular spectrum");
  const double beta =
      static_cast<double>(std::min(rows, cols)) / static_cast<double>(std::max(rows, cols));
  const double tau =
      hard_threshold_coefficient(beta) * median_of_sorted_desc(singular_values);
  int k = 0;
  for (Eigen::Index i = 0; i < singular_values.size(); ++i)
    if (singular_values[i] > tau) ++k;
  return std::max(k, 1);
}

std::pair<SelfDynamicsFactor, TransitionState>
estimate_factor(const Eigen::VectorXd& signal, int h, double mu) {
  if (mu <= 0.0 || mu > 1.0)
    throw std::invalid_argument("estimate_factor: mu must be in (0, 1]");
  if (signal.size() < h + 2)
    throw std::invalid_argument("estimate_factor: signal shorter than h + 2");

  const HankelMatrix hankel = build_hankel(signal, h);
  auto [left, right] = build_shift_pairs(hankel);
  const Eigen::Index m = right.cols();

  // Forgetting weights mu^(m-1), ..., mu^0 (newest column unweighted).
  Eigen::VectorXd weights(m);
  double w = 1.0;
  for (Eigen::Index j = m - 1; j >= 0; --j) {
    weights[j] = w;
    w *= mu;
  }
  const Eigen::MatrixXd right_w = right * weights.asDiagonal();
  const Eigen::MatrixXd left_w = left * weights.asDiagonal();

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      right_w, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] <= 0.0)
    throw std::invalid_argument("estimate_factor: rank collapse (zero signal)");

  int k = optimal_rank(sigma, h, m);
  // Never keep numerically dead directions.
  const double rank_tol = sigma[0] * 1e-12 * std::max<Eigen::Index>(h, m);
  int numerical_rank = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma[i] > rank_tol) ++numerical_rank;
  k = std::min(k, std::max(numerical_rank, 1));

  const Eigen::MatrixXd u_k = svd.matrixU().leftCols(k);
  const Eigen::MatrixXd v_k = svd.matrixV().leftCols(k);
  const Eigen::VectorXd sigma_inv = sigma.head(k).cwiseInverse();

  const Eigen::MatrixXd a_tilde =
      u_k.transpose() * left_w * v_k * sigma_inv.asDiagonal();

  Eigen::EigenSolver<Eigen::MatrixXd> eig(a_tilde);
  Eigen::VectorXcd lambda = eig.eigenvalues();
  Eigen::MatrixXcd z = eig.eigenvectors();

  // Deterministic ordering: |lambda| descending, argument ascending.
  std::vector<int> order(static_cast<size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(lambda[a]), mb = std::abs(lambda[b]);
    if (std::abs(ma - mb) > 1e-12 * std::max({ma, mb, 1.0})) return ma > mb;
    return std::arg(lambda[a]) < std::arg(lambda[b]);
  });
  Eigen::VectorXcd lambda_sorted(k);
  Eigen::MatrixXcd z_sorted(k, k);
  for (int i = 0; i < k; ++i) {
    lambda_sorted[i] = lambda[order[i]];
    z_sorted.col(i) = z.col(order[i]);
  }

  SelfDynamicsFactor factor;
  factor.phi = u_k * z_sorted;
  factor.lambda = lambda_sorted;

  // Full-order transition state for streaming updates. P gets a tiny ridge
  // so rank-deficient windows (pure low-order dynamics) still yield a
  // usable positive-definite matrix.
  TransitionState state;
  state.mu = mu;
  Eigen::MatrixXd gram = right_w * right.transpose();
  gram = 0.5 * (gram + gram.transpose().eval());
  const double ridge = 1e-10 * std::max(gram.trace(), 1.0) / h;
  gram.diagonal().array() += ridge;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
  state.p = ldlt.solve(Eigen::MatrixXd::Identity(h, h));
  state.p = 0.5 * (state.p + state.p.transpose().eval());
  state.a = (left_w * right.transpose()) * state.p;
  return {std::move(factor), std::move(state)};
}

TransitionState rls_step(const TransitionState& state,
                         const DelayVector& prev_embed,
                         const DelayVector& new_embed) {
  const Eigen::Index h = state.a.rows();
  if (prev_embed.size() != h || new_embed.size() != h)
    throw std::invalid_argument("rls_step: delay vector size mismatch");

  const Eigen::VectorXd pg = state.p * prev_embed;
  const double denom = state.mu + prev_embed.dot(pg);
  const Eigen::RowVectorXd gain = pg.transpose() / denom;

  TransitionState next;
  next.mu = state.mu;
  next.a = state.a + (new_embed - state.a * prev_embed) * gain;
  next.p = (state.p - pg * gain) / state.mu;
  next.p = 0.5 * (next.p + next.p.transpose().eval());
  return next;
}

SelfDynamicsFactor refresh_eigen(const TransitionState& state, int k) {
  const Eigen::Index h = state.a.rows();
  if (k < 1 || k > h)
    throw std::invalid_argument("refresh_eigen: k out of range");

  SelfDynamicsFactor factor;
  if (state.a.norm() == 0.0) {
    factor.phi = Eigen::MatrixXcd::Zero(h, 1);
    factor.phi(0, 0) = 1.0;
    factor.lambda = Eigen::VectorXcd::Zero(1);
    factor.degenerate = true;
    return factor;
  }

  Eigen::EigenSolver<Eigen::MatrixXd> eig(state.a);
  const Eigen::VectorXcd& lambda = eig.eigenvalues();
  const Eigen::MatrixXcd& vecs = eig.eigenvectors();

  std::vector<int> order(static_cast<size_t>(h));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double ma = std::abs(lambda[a]), mb = std::abs(lambda[b]);
    if (std::abs(ma - mb) > 1e-12 * std::max({ma, mb, 1.0})) return ma > mb;
    return std::arg(lambda[a]) < std::arg(lambda[b]);
  });

  factor.phi.resize(h, k);
  factor.lambda.resize(k);
  for (int i = 0; i < k; ++i) {
    factor.lambda[i] = lambda[order[i]];
    factor.phi.col(i) = vecs.col(order[i]);
  }
  return factor;
}

LatentState evolve(const LatentState& s, const SelfDynamicsFactor& factor,
                   long steps) {
  if (steps < 0) throw std::invalid_argument("evolve: negative step count");
  if (s.size() != factor.lambda.size())
    throw std::invalid_argument("evolve: latent dimension mismatch");
  LatentState out = s;
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out[i] *= std::pow(factor.lambda[i], static_cast<double>(steps));
  return out;
}

double reconstruct(const LatentState& s, const SelfDynamicsFactor& factor) {
  if (s.size() != factor.phi.cols())
    throw std::invalid_argument("reconstruct: latent dimension mismatch");
  return invert_embed(Eigen::VectorXcd(factor.phi * s));
}

ModeInterpretation interpret_eigenvalue(std::complex<double> lambda,
                                        double delta_t) {
  if (delta_t <= 0.0)
    throw std::invalid_argument("interpret_eigenvalue: delta_t must be > 0");
  if (lambda == std::complex<double>(0.0, 0.0))
    throw std::invalid_argument("interpret_eigenvalue: zero eigenvalue");
  return {std::log(std::abs(lambda)) / delta_t, std::arg(lambda) / delta_t,
          delta_t};
}

}  // namespace modeplait
