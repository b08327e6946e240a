#pragma once

// The streaming core: maintain the regime set, fit/search/create regimes,
// forecast and identify causality, and update the active regime in place,
// all in constant time per tick with respect to stream length.

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "modeplait/causal.hpp"
#include "modeplait/ica.hpp"
#include "modeplait/levmar.hpp"
#include "modeplait/mode_dynamics.hpp"

namespace modeplait {

// One distinct dynamical pattern: demixing matrix plus the d per-signal
// self-dynamics factors. `mean` is the window mean removed before demixing,
// so v = w^-1 e + mean.
struct Regime {
  Eigen::MatrixXd w;
  Eigen::MatrixXd w_inv;
  Eigen::VectorXd mean;
  std::vector<SelfDynamicsFactor> factors;

  int dims() const { return static_cast<int>(w.rows()); }
};

// Streaming-update companion of a regime: per-signal RLS state and the
// per-component energies used by the demixing-row updates.
struct UpdateState {
  std::vector<TransitionState> trans;
  Eigen::VectorXd energy;
  std::vector<bool> eigen_dirty;
};

struct ModelCandidate {
  int active_regime_index = -1;
  // Newest delay vector of each demixed signal; forecasting advances these
  // with powers of the per-signal transition matrix.
  std::vector<DelayVector> delay;
  // Recent root-mean-square of each demixed signal; forecasts are clipped to
  // a few times this so a transiently ill-conditioned transition estimate
  // cannot emit runaway values.
  Eigen::VectorXd scale;
  std::vector<LatentState> s0;  // fitted initial conditions
  long window_start = 0;
};

struct EngineConfig {
  int n_window = 50;
  int h = 8;
  double mu = 0.98;
  // Regime-fit threshold: tau = tau_unit * d * scored-range length. With
  // tau_unit <= 0 the unit is calibrated from the refit error observed
  // right after the first regime creation, scaled by tau_auto_scale.
  double tau_unit = 0.0;
  double tau_auto_scale = 2.5;
  int l_s = 5;
  double edge_threshold = 0.3;
  LevMarOptions lm;
  int search_lm_iters = 10;  // cheap LM budget during the regime search
  // The score must stay above tau for this many consecutive ticks before a
  // new regime may be created, so the creation window is mostly post-change
  // data rather than straddling the change point.
  int creation_delay = 40;
  // A candidate regime is accepted only if its score is below this fraction
  // of the best existing regime's score; transient noise bursts that no
  // regime can fit are then ridden out instead of spawning duplicates.
  double creation_gain = 0.35;
  // Lag order of the auxiliary vector-autoregression whose one-step
  // innovations drive the demixing estimation. Serial correlation in the
  // values dilutes their non-Gaussianity; the innovations keep it.
  int var_lags = 2;
  // Step size of the per-tick natural-gradient refinement of W. Samples
  // whose demixed energy exceeds a few units per component get a
  // proportionally smaller step, so bursts cannot destabilize W.
  double w_step = 0.02;
  std::uint32_t seed = 0;
  bool freeze_identity_w = false;  // ablation: skip ICA, fix W = I
  IcaConfig ica;

  void validate(int d) const;
};

struct StepOutput {
  bool warmup = true;
  long t = 0;                 // 0-based tick index
  Eigen::VectorXd forecast;   // v(t + l_s); empty during warm-up
  CausalAdjacency causal;
  int regime_id = -1;
  bool created_new = false;
  bool switched = false;
  double fit_error = 0.0;
};

// Sum over the scored range t = h-1 .. m-1 of ||x(t) - v(t)||_2, where v is
// generated from s0 under the regime.
double fit_error(const Eigen::MatrixXd& window,
                 const std::vector<LatentState>& s0, const Regime& regime);

struct InitialStateFit {
  std::vector<LatentState> s0;
  double f = 0.0;
  bool converged = true;
};

// Levenberg-Marquardt fit of the initial latent states against the window,
// warm-started from the mode pseudoinverse when no init is given. Never
// worse than the warm start.
InitialStateFit optimize_initial_state(
    const Eigen::MatrixXd& window, const Regime& regime,
    const std::vector<LatentState>* s0_init, const LevMarOptions& opts);

// Batch estimation of a complete regime from one window: ICA on one-step
// autoregressive innovations (either supplied by the caller or computed from
// the window itself), then one self-dynamics factor per inherent signal.
// The innovation mixing matrix equals the value mixing matrix up to row
// scale, so the same W demixes both.
std::pair<Regime, UpdateState> regime_creation(
    const Eigen::MatrixXd& window, const EngineConfig& cfg,
    const Eigen::MatrixXd* innovations = nullptr);

// One natural-gradient independence step on the demixing matrix (extended
// infomax, super-Gaussian contrast), driven by one autoregressive innovation
// sample: W += step * (I - tanh(y) y^T - y y^T) W with y = W * innovation.
// The step is shrunk by max(1, ||y||^2 / 4d) so bursts cannot blow up W, and
// a step that would make W singular is skipped. Per-component output energy
// is accumulated into `energy`. Returns y.
Eigen::VectorXd update_demixing_rows(Eigen::MatrixXd& w, Eigen::MatrixXd& w_inv,
                                     Eigen::VectorXd& energy,
                                     const Eigen::VectorXd& innovation,
                                     double step);

class StreamingEngine {
 public:
  StreamingEngine(int d, EngineConfig cfg);

  // Feeds one observation; runs estimator -> generator -> updater once the
  // first full window is available. Throws on non-finite input; any mid-tick
  // failure rolls the engine back to its pre-tick state.
  StepOutput process_tick(const Eigen::VectorXd& x);

  int dims() const { return d_; }
  long ticks_seen() const { return t_count_; }
  int regime_count() const { return static_cast<int>(regimes_.size()); }
  const Regime& regime(int idx) const { return regimes_.at(idx); }
  const ModelCandidate& candidate() const { return candidate_; }
  const EngineConfig& config() const { return cfg_; }
  double current_tau() const;

 private:
  struct EstimatorOutcome {
    double f = 0.0;
    bool created = false;
    bool switched = false;
  };

  Eigen::MatrixXd current_window() const;
  void ingest_innovation(const Eigen::VectorXd& x);
  void ensure_fresh_factors(int regime_idx);
  EstimatorOutcome mode_estimator(const Eigen::MatrixXd& window);
  std::pair<Eigen::VectorXd, CausalAdjacency> mode_generator() const;
  void regime_updater(const Eigen::MatrixXd& window);
  void adopt_fit(int regime_idx, const InitialStateFit& fit,
                 const Eigen::MatrixXd& window);

  int d_;
  EngineConfig cfg_;
  long t_count_ = 0;
  std::vector<Eigen::VectorXd> buffer_;  // last n_window samples
  std::vector<Regime> regimes_;
  std::vector<UpdateState> update_states_;
  ModelCandidate candidate_;
  double tau_unit_effective_ = 0.0;
  int pending_create_ = 0;  // consecutive over-threshold ticks

  // Auxiliary vector autoregression over the raw values (recursive least
  // squares with forgetting); its one-step innovations are what the demixing
  // estimation actually separates.
  Eigen::MatrixXd var_a_;                    // d x d*var_lags
  Eigen::MatrixXd var_p_;                    // inverse regressor Gram
  Eigen::VectorXd var_mean_;                 // EWMA value mean
  std::vector<Eigen::VectorXd> innov_ring_;  // last n_window innovations
  Eigen::VectorXd last_innov_;

  // Realized forecast-error tracking: pending forecasts waiting for their
  // target tick, and EWMA per-coordinate forecast error / deviation variance.
  // Their ratio shrinks the emitted forecast toward the regime mean, so a
  // transiently wrong model degrades to the best constant predictor instead
  // of emitting confident junk.
  std::vector<std::pair<long, Eigen::VectorXd>> pending_forecasts_;
  Eigen::VectorXd fc_mse_;
  Eigen::VectorXd dev_var_;
};

}  // namespace modeplait
