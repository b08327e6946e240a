#pragma once

// Per-signal latent dynamics: mode/eigenvalue estimation from one inherent
// signal, incremental transition-matrix updates with a forgetting factor,
// latent-state evolution and signal reconstruction.

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "modeplait/embedding.hpp"

namespace modeplait {

// Modes (columns of phi) and the matching eigenvalues of one signal's
// latent linear dynamics.
struct SelfDynamicsFactor {
  Eigen::MatrixXcd phi;     // h x k
  Eigen::VectorXcd lambda;  // k
  bool degenerate = false;  // set when the spectrum collapsed to zero

  int k() const { return static_cast<int>(lambda.size()); }
  int h() const { return static_cast<int>(phi.rows()); }
};

// Transition matrix A together with P = (R M R^T)^-1, everything needed to
// keep refitting A one sample at a time.
struct TransitionState {
  Eigen::MatrixXd a;  // h x h
  Eigen::MatrixXd p;  // h x h, symmetric positive-definite
  double mu = 0.98;   // forgetting factor in (0, 1]
};

using LatentState = Eigen::VectorXcd;

struct ModeInterpretation {
  double decay_rate;  // ln|lambda| / dt
  double frequency;   // arg(lambda) / dt
  double delta_t;
};

// Count of singular values above the optimal hard threshold (median-based,
// unknown noise level), clamped to >= 1. `rows`/`cols` give the shape of
// the matrix the spectrum came from.
int optimal_rank(const Eigen::VectorXd& singular_values, Eigen::Index rows,
                 Eigen::Index cols);

// Batch estimation of one signal's dynamics: Hankel embedding, weighted SVD
// of R*M, rank truncation, projected eigendecomposition, modes Phi = U*Z.
// Also returns the full transition matrix A = (L M R^T)(R M R^T)^-1 and
// P = (R M R^T)^-1 for subsequent streaming updates.
std::pair<SelfDynamicsFactor, TransitionState>
estimate_factor(const Eigen::VectorXd& signal, int h, double mu);

// One recursive-least-squares step folding the pair (prev -> next) into A
// and P. Exact: matches the batch weighted solve over the same pairs.
TransitionState rls_step(const TransitionState& state,
                         const DelayVector& prev_embed,
                         const DelayVector& new_embed);

// Eigendecomposition of A restricted to the k leading eigenvalues by
// magnitude (ties: argument ascending).
SelfDynamicsFactor refresh_eigen(const TransitionState& state, int k);

// s' = Lambda^steps (elementwise) * s.
LatentState evolve(const LatentState& s, const SelfDynamicsFactor& factor,
                   long steps);

// Signal value generated by a latent state: invert_embed(Phi * s).
double reconstruct(const LatentState& s, const SelfDynamicsFactor& factor);

ModeInterpretation interpret_eigenvalue(std::complex<double> lambda,
                                        double delta_t);

}  // namespace modeplait
