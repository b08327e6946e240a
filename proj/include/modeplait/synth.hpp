#pragma once

// Ground-truthed synthetic streams: per-cluster random-DAG structural
// equation models driven by Laplace noise whose log-variance follows an
// autoregressive process.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "modeplait/causal.hpp"

namespace modeplait {

struct GenConfig {
  int d = 5;
  double edge_density = 0.5;
  double weight_low = 0.5;   // |weight| drawn uniformly from [low, high]
  double weight_high = 2.0;  // with a random sign
  int segment_len = 500;
  std::vector<int> sequence = {1, 2, 1};  // cluster ids, >= 1
  double ar_coeff_low = 0.8;
  double ar_coeff_high = 0.998;
  double ar_noise_var_low = 0.01;
  double ar_noise_var_high = 0.1;
  // Latent temporal dynamics of each exogenous signal: the sample is a mix of
  // the current Laplace innovation and a damped resonator (modes
  // decay * exp(+-i * freq)) driven by past innovations. The current-innovation
  // part keeps the marginal sharply non-Gaussian (so the mixture stays
  // ICA-separable), while the resonator part makes values predictable.
  // value_mix is the variance fraction carried by the resonator; zero
  // reproduces serially independent draws.
  double value_mix = 0.4;
  double value_decay_low = 0.9;
  double value_decay_high = 0.97;
  double value_freq_low = 0.25;
  double value_freq_high = 1.2;
  bool redraw_ar_per_segment = false;  // default: AR params fixed per cluster
  std::uint64_t seed = 0;
};

struct Segment {
  long start;  // inclusive, 0-based tick
  long end;    // exclusive
  int cluster_id;
};

struct GroundTruth {
  std::vector<CausalAdjacency> cluster_b;  // indexed by cluster id - 1
  std::vector<Segment> segments;

  // Cluster id (1-based) owning tick t.
  int cluster_at(long t) const;
};

struct SynthStream {
  Eigen::MatrixXd x;  // d x T
  Eigen::MatrixXd e;  // exogenous draws actually used, d x T
  GroundTruth truth;
};

using Rng = std::mt19937_64;

// Random DAG: uniform variable ordering, each order-respecting edge kept
// independently with probability `density`. adjacency(i, j) = edge j -> i.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>
sample_dag(int d, double density, Rng& rng);

CausalAdjacency sample_weights(
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& dag,
    const GenConfig& cfg, Rng& rng);

// One exogenous signal: e(t) ~ Laplace(0, variance exp(h_t)) with
// h_t = phi * h_{t-1} + eta_t.
Eigen::VectorXd sample_exogenous(long length, double ar_coeff,
                                 double ar_noise_var, Rng& rng);

SynthStream generate_stream(const GenConfig& cfg);

}  // namespace modeplait
