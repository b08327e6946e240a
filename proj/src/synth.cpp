#include "modeplait/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace modeplait {

namespace {

double sample_laplace(double variance, Rng& rng) {
  // Inverse CDF; scale b satisfies variance = 2 b^2.
  const double b = std::sqrt(variance / 2.0);
  std::uniform_real_distribution<double> unif(-0.5, 0.5);
  const double u = unif(rng);
  return -b * std::copysign(1.0, u) * std::log1p(-2.0 * std::abs(u));
}

}  // namespace

int GroundTruth::cluster_at(long t) const {
  for (const Segment& s : segments)
    if (t >= s.start && t < s.end) return s.cluster_id;
  throw std::out_of_range("GroundTruth::cluster_at: tick outside stream");
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>
sample_dag(int d, double density, Rng& rng) {
  if (density < 0.0 || density > 1.0)
    throw std::invalid_argument("sample_dag: density must lie in [0, 1]");
  std::vector<int> order(static_cast<size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(d, d);
  adj.setConstant(false);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b)
      if (unif(rng) < density) adj(order[b], order[a]) = true;  // early -> late
  return adj;
}

CausalAdjacency sample_weights(
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& dag,
    const GenConfig& cfg, Rng& rng) {
  const int d = static_cast<int>(dag.rows());
  CausalAdjacency out{Eigen::MatrixXd::Zero(d, d)};
  std::uniform_real_distribution<double> mag(cfg.weight_low, cfg.weight_high);
  std::uniform_int_distribution<int> sign(0, 1);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (dag(i, j)) out.b(i, j) = (sign(rng) ? 1.0 : -1.0) * mag(rng);
  return out;
}

Eigen::VectorXd sample_exogenous(long length, double ar_coeff,
                                 double ar_noise_var, Rng& rng) {
  if (length < 1) throw std::invalid_argument("sample_exogenous: empty length");
  Eigen::VectorXd e(length);
  std::normal_distribution<double> eta(0.0, std::sqrt(ar_noise_var));
  double log_var = 0.0;
  for (long t = 0; t < length; ++t) {
    log_var = ar_coeff * log_var + (ar_noise_var > 0.0 ? eta(rng) : 0.0);
    e[t] = sample_laplace(std::exp(log_var), rng);
  }
  return e;
}

SynthStream generate_stream(const GenConfig& cfg) {
  if (cfg.segment_len <= 0 || cfg.sequence.empty())
    throw std::invalid_argument("generate_stream: invalid segment layout");
  const int n_clusters =
      *std::max_element(cfg.sequence.begin(), cfg.sequence.end());
  for (int id : cfg.sequence)
    if (id < 1) throw std::invalid_argument("generate_stream: cluster ids start at 1");

  Rng rng(cfg.seed);

  SynthStream out;
  out.truth.cluster_b.resize(static_cast<size_t>(n_clusters));
  std::vector<Eigen::MatrixXd> mixing(static_cast<size_t>(n_clusters));
  std::vector<Eigen::VectorXd> ar_coeff(static_cast<size_t>(n_clusters));
  std::vector<Eigen::VectorXd> ar_var(static_cast<size_t>(n_clusters));
  std::vector<Eigen::VectorXd> decay(static_cast<size_t>(n_clusters));
  std::vector<Eigen::VectorXd> freq(static_cast<size_t>(n_clusters));
  for (int c = 0; c < n_clusters; ++c) {
    const auto dag = sample_dag(cfg.d, cfg.edge_density, rng);
    out.truth.cluster_b[c] = sample_weights(dag, cfg, rng);
    mixing[c] = (Eigen::MatrixXd::Identity(cfg.d, cfg.d) - out.truth.cluster_b[c].b)
                    .inverse();
    ar_coeff[c].resize(cfg.d);
    ar_var[c].resize(cfg.d);
    decay[c].resize(cfg.d);
    freq[c].resize(cfg.d);
    std::uniform_real_distribution<double> coeff(cfg.ar_coeff_low, cfg.ar_coeff_high);
    std::uniform_real_distribution<double> var(cfg.ar_noise_var_low,
                                               cfg.ar_noise_var_high);
    std::uniform_real_distribution<double> dec(cfg.value_decay_low,
                                               cfg.value_decay_high);
    std::uniform_real_distribution<double> frq(cfg.value_freq_low,
                                               cfg.value_freq_high);
    for (int i = 0; i < cfg.d; ++i) {
      ar_coeff[c][i] = coeff(rng);
      ar_var[c][i] = var(rng);
      decay[c][i] = dec(rng);
      freq[c][i] = frq(rng);
    }
  }

  const long total = static_cast<long>(cfg.segment_len) * static_cast<long>(cfg.sequence.size());
  out.x.resize(cfg.d, total);
  out.e.resize(cfg.d, total);

  long t0 = 0;
  for (int id : cfg.sequence) {
    const int c = id - 1;
    Eigen::VectorXd phi = ar_coeff[c], var = ar_var[c];
    if (cfg.redraw_ar_per_segment) {
      std::uniform_real_distribution<double> coeff(cfg.ar_coeff_low, cfg.ar_coeff_high);
      std::uniform_real_distribution<double> v(cfg.ar_noise_var_low, cfg.ar_noise_var_high);
      for (int i = 0; i < cfg.d; ++i) {
        phi[i] = coeff(rng);
        var[i] = v(rng);
      }
    }
    for (int i = 0; i < cfg.d; ++i) {
      const Eigen::VectorXd innov =
          sample_exogenous(cfg.segment_len, phi[i], var[i], rng);
      // Each sample mixes the current innovation with a damped resonator
      // driven by the *past* innovations. Blending rather than filtering
      // everything keeps a sharp non-Gaussian component in every sample, so
      // blind source separation still works on the values.
      const double r = decay[c][i];
      const double a1 = 2.0 * r * std::cos(freq[c][i]);
      const double a2 = -r * r;
      // Squared impulse-response norm of the resonator (stationary gain).
      double gain2 = 0.0, h1 = 0.0, h2 = 0.0, impulse = 1.0;
      for (int k = 0; k < 400; ++k) {
        const double hk = a1 * h1 + a2 * h2 + impulse;
        impulse = 0.0;
        gain2 += hk * hk;
        h2 = h1;
        h1 = hk;
      }
      const double w_spike = std::sqrt(1.0 - cfg.value_mix);
      const double w_reso = std::sqrt(cfg.value_mix / gain2);
      double prev1 = 0.0, prev2 = 0.0;
      for (long t = 0; t < cfg.segment_len; ++t) {
        const double p = a1 * prev1 + a2 * prev2 + (t > 0 ? innov[t - 1] : 0.0);
        out.e(i, t0 + t) = w_spike * innov[t] + w_reso * p;
        prev2 = prev1;
        prev1 = p;
      }
    }
    out.x.block(0, t0, cfg.d, cfg.segment_len) =
        mixing[c] * out.e.block(0, t0, cfg.d, cfg.segment_len);
    out.truth.segments.push_back({t0, t0 + cfg.segment_len, id});
    t0 += cfg.segment_len;
  }
  return out;
}

}  // namespace modeplait
