#include "modeplait/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace modeplait {

namespace {

// Per-signal coefficient matrix C with C(p, q) = phi(0, q) * lambda_q^p, so
// that e_i(t_0 + p) = Re(C.row(p) * s0_i). The whole window fit is linear in
// the latent initial conditions.
Eigen::MatrixXcd mode_coefficients(const SelfDynamicsFactor& factor,
                                   long steps) {
  const int k = factor.k();
  Eigen::MatrixXcd c(steps, k);
  Eigen::RowVectorXcd row = factor.phi.row(0);
  for (long p = 0; p < steps; ++p) {
    c.row(p) = row;
    for (int q = 0; q < k; ++q) row[q] *= factor.lambda[q];
  }
  return c;
}

int total_latent_dim(const Regime& regime) {
  int total = 0;
  for (const auto& f : regime.factors) total += f.k();
  return total;
}

// Squared off-diagonal correlation mass of the demixed window. The value
// residual alone barely separates regimes when samples are serially
// near-independent, but a foreign demixing matrix leaves the extracted
// signals visibly correlated; this term supplies that signal.
double structure_penalty(const Eigen::MatrixXd& window, const Regime& regime) {
  if (regime.dims() < 2) return 0.0;
  const Eigen::MatrixXd y = regime.w * (window.colwise() - regime.mean);
  const Eigen::MatrixXd yc = y.colwise() - y.rowwise().mean();
  const Eigen::MatrixXd cov =
      yc * yc.transpose() / static_cast<double>(y.cols());
  const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
  double acc = 0.0;
  for (int i = 0; i < cov.rows(); ++i)
    for (int j = 0; j < cov.cols(); ++j) {
      if (i == j) continue;
      const double denom = sd[i] * sd[j];
      if (denom <= 0.0) continue;
      const double c = cov(i, j) / denom;
      acc += c * c;
    }
  return acc;
}

// Root-mean-square per-tick amplitude of the centered window; used to make
// threshold comparisons invariant to the slowly drifting noise envelope.
double window_scale(const Eigen::MatrixXd& window) {
  const Eigen::MatrixXd c = window.colwise() - window.rowwise().mean();
  return std::max(std::sqrt(c.squaredNorm() / static_cast<double>(c.cols())),
                  1e-12);
}

// Score used for threshold comparison and regime search: amplitude-normalized
// fit error times the structural term. The structural term only counts its
// excess over the sampling floor: for n samples each of the d*(d-1)
// off-diagonal sample correlations contributes about 1/n squared mass even
// when the signals are truly independent.
double regime_score(const Eigen::MatrixXd& window, const Regime& regime,
                    double f, double scale) {
  const double d = static_cast<double>(regime.dims());
  const double floor = d * (d - 1.0) / static_cast<double>(window.cols());
  const double excess =
      std::max(0.0, structure_penalty(window, regime) - floor);
  return (f / scale) * (1.0 + excess);
}

// Eigenvalue magnitudes above one are estimation noise on a stationary
// stream, but they compound over the forecast horizon and the scored window;
// project them back onto the unit circle.
SelfDynamicsFactor stabilize(SelfDynamicsFactor factor) {
  for (int q = 0; q < factor.k(); ++q) {
    const double mag = std::abs(factor.lambda[q]);
    if (mag > 1.0) factor.lambda[q] /= mag;
  }
  return factor;
}

}  // namespace

void EngineConfig::validate(int d) const {
  if (d < 1) throw std::invalid_argument("EngineConfig: d must be >= 1");
  if (h < 1) throw std::invalid_argument("EngineConfig: h must be >= 1");
  if (n_window <= h + 2)
    throw std::invalid_argument("EngineConfig: n_window must exceed h + 2");
  if (mu <= 0.0 || mu > 1.0)
    throw std::invalid_argument("EngineConfig: mu must be in (0, 1]");
  if (l_s < 0) throw std::invalid_argument("EngineConfig: l_s must be >= 0");
  if (edge_threshold < 0.0)
    throw std::invalid_argument("EngineConfig: edge_threshold must be >= 0");
  if (tau_unit <= 0.0 && tau_auto_scale <= 0.0)
    throw std::invalid_argument("EngineConfig: no usable tau setting");
  if (creation_delay < 1)
    throw std::invalid_argument("EngineConfig: creation_delay must be >= 1");
  if (creation_gain <= 0.0 || creation_gain > 1.0)
    throw std::invalid_argument("EngineConfig: creation_gain must be in (0, 1]");
  if (var_lags < 1 || n_window <= var_lags + 2)
    throw std::invalid_argument(
        "EngineConfig: need 1 <= var_lags < n_window - 2");
  if (w_step <= 0.0 || w_step >= 1.0)
    throw std::invalid_argument("EngineConfig: w_step must be in (0, 1)");
}

double fit_error(const Eigen::MatrixXd& window,
                 const std::vector<LatentState>& s0, const Regime& regime) {
  const int d = regime.dims();
  const Eigen::Index m = window.cols();
  const int h = regime.factors.empty() ? 1 : regime.factors.front().h();
  if (window.rows() != d || static_cast<int>(s0.size()) != d)
    throw std::invalid_argument("fit_error: dimension mismatch");
  if (m < h) throw std::invalid_argument("fit_error: window shorter than h");

  const long steps = m - h + 1;
  double f = 0.0;
  Eigen::VectorXd e(d);
  std::vector<Eigen::MatrixXcd> coeff(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) coeff[i] = mode_coefficients(regime.factors[i], steps);
  for (long p = 0; p < steps; ++p) {
    for (int i = 0; i < d; ++i)
      e[i] = (coeff[i].row(p) * s0[i]).value().real();
    const Eigen::VectorXd v = regime.w_inv * e + regime.mean;
    f += (window.col(h - 1 + p) - v).norm();
  }
  return f;
}

InitialStateFit optimize_initial_state(
    const Eigen::MatrixXd& window, const Regime& regime,
    const std::vector<LatentState>* s0_init, const LevMarOptions& opts) {
  const int d = regime.dims();
  const Eigen::Index m = window.cols();
  const int h = regime.factors.front().h();
  if (m < h + 1)
    throw std::invalid_argument("optimize_initial_state: window too short");
  const long steps = m - h + 1;

  // Warm start: per-signal pseudoinverse of the modes applied to the delay
  // vector at the start of the scored range.
  std::vector<LatentState> warm(static_cast<size_t>(d));
  if (s0_init) {
    warm = *s0_init;
  } else {
    const Eigen::MatrixXd centered = window.colwise() - regime.mean;
    const Eigen::MatrixXd signals = regime.w * centered;
    for (int i = 0; i < d; ++i) {
      const Eigen::VectorXd sig = signals.row(i).transpose();
      const Eigen::VectorXcd g = embed(sig, h, h - 1).cast<std::complex<double>>();
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
          regime.factors[i].phi, Eigen::ComputeThinU | Eigen::ComputeThinV);
      warm[i] = svd.solve(g);
    }
  }

  std::vector<Eigen::MatrixXcd> coeff(static_cast<size_t>(d));
  std::vector<int> offset(static_cast<size_t>(d));
  int n_params = 0;
  for (int i = 0; i < d; ++i) {
    coeff[i] = mode_coefficients(regime.factors[i], steps);
    offset[i] = n_params;
    n_params += 2 * regime.factors[i].k();
  }

  // Constant Jacobian: residuals are linear in (Re s0, Im s0).
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(d * steps, n_params);
  for (long p = 0; p < steps; ++p)
    for (int i = 0; i < d; ++i) {
      const int k = regime.factors[i].k();
      for (int q = 0; q < k; ++q) {
        const std::complex<double> c = coeff[i](p, q);
        jac.block(p * d, offset[i] + q, d, 1) = -c.real() * regime.w_inv.col(i);
        jac.block(p * d, offset[i] + k + q, d, 1) = c.imag() * regime.w_inv.col(i);
      }
    }

  auto pack = [&](const std::vector<LatentState>& s0) {
    Eigen::VectorXd u(n_params);
    for (int i = 0; i < d; ++i) {
      const int k = regime.factors[i].k();
      u.segment(offset[i], k) = s0[i].real();
      u.segment(offset[i] + k, k) = s0[i].imag();
    }
    return u;
  };
  auto unpack = [&](const Eigen::VectorXd& u) {
    std::vector<LatentState> s0(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) {
      const int k = regime.factors[i].k();
      s0[i] = u.segment(offset[i], k) +
              std::complex<double>(0, 1) * u.segment(offset[i] + k, k);
    }
    return s0;
  };

  auto eval = [&](const Eigen::VectorXd& u, Eigen::VectorXd& r,
                  Eigen::MatrixXd& j) {
    const auto s0 = unpack(u);
    r.resize(d * steps);
    Eigen::VectorXd e(d);
    for (long p = 0; p < steps; ++p) {
      for (int i = 0; i < d; ++i)
        e[i] = (coeff[i].row(p) * s0[i]).value().real();
      r.segment(p * d, d) =
          window.col(h - 1 + p) - (regime.w_inv * e + regime.mean);
    }
    j = jac;
  };

  const LevMarResult lm = levenberg_marquardt(eval, pack(warm), opts);

  InitialStateFit out;
  out.converged = lm.converged;
  const double f_warm = fit_error(window, warm, regime);
  const auto s0_lm = unpack(lm.x);
  const double f_lm = fit_error(window, s0_lm, regime);
  if (f_lm <= f_warm) {
    out.s0 = s0_lm;
    out.f = f_lm;
  } else {
    out.s0 = warm;
    out.f = f_warm;
  }
  return out;
}

// One-step innovations of a window under a ridge-regularized vector
// autoregression fitted to the window itself.
Eigen::MatrixXd window_innovations(const Eigen::MatrixXd& window, int lags) {
  const int d = static_cast<int>(window.rows());
  const long n = window.cols();
  const Eigen::VectorXd mean = window.rowwise().mean();
  const Eigen::MatrixXd xc = window.colwise() - mean;
  const long m = n - lags;
  Eigen::MatrixXd z(d * lags, m), y(d, m);
  for (long t = 0; t < m; ++t) {
    y.col(t) = xc.col(lags + t);
    for (int l = 0; l < lags; ++l)
      z.block(l * d, t, d, 1) = xc.col(lags + t - 1 - l);
  }
  Eigen::MatrixXd gram = z * z.transpose();
  gram.diagonal().array() += 1e-3 * gram.trace() / gram.rows() + 1e-12;
  const Eigen::MatrixXd a = gram.ldlt().solve(z * y.transpose()).transpose();
  return y - a * z;
}

std::pair<Regime, UpdateState> regime_creation(
    const Eigen::MatrixXd& window, const EngineConfig& cfg,
    const Eigen::MatrixXd* innovations) {
  const int d = static_cast<int>(window.rows());
  const Eigen::Index m = window.cols();
  if (m < cfg.h + 2)
    throw std::invalid_argument("regime_creation: window shorter than h + 2");
  if (m < cfg.var_lags + 2)
    throw std::invalid_argument("regime_creation: window shorter than lags + 2");

  Regime regime;
  regime.mean = window.rowwise().mean();
  if (cfg.freeze_identity_w) {
    regime.w = Eigen::MatrixXd::Identity(d, d);
    regime.w_inv = regime.w;
  } else {
    IcaConfig ica_cfg = cfg.ica;
    ica_cfg.seed = cfg.seed;
    const IcaResult ica = fixed_point_ica(
        innovations ? *innovations : window_innovations(window, cfg.var_lags),
        ica_cfg);
    regime.w = ica.w;
    regime.w_inv = ica.w.inverse();
  }
  const Eigen::MatrixXd signals = regime.w * (window.colwise() - regime.mean);

  UpdateState update;
  update.energy.resize(d);
  regime.factors.reserve(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    auto [factor, trans] =
        estimate_factor(signals.row(i).transpose(), cfg.h, cfg.mu);
    // Keep the full eigenbasis of the transition matrix: with all h modes,
    // projecting the newest delay vector and evolving it reproduces the
    // least-squares multi-step forecast exactly, whereas a truncated basis
    // plus pseudoinverse projection loses forecast accuracy.
    regime.factors.push_back(stabilize(refresh_eigen(trans, cfg.h)));
    (void)factor;
    update.trans.push_back(std::move(trans));
    double energy = 0.0;
    for (Eigen::Index j = 0; j < m; ++j)
      energy = cfg.mu * energy + signals(i, j) * signals(i, j);
    update.energy[i] = energy;
  }
  update.eigen_dirty.assign(static_cast<size_t>(d), false);
  return {std::move(regime), std::move(update)};
}

Eigen::VectorXd update_demixing_rows(Eigen::MatrixXd& w, Eigen::MatrixXd& w_inv,
                                     Eigen::VectorXd& energy,
                                     const Eigen::VectorXd& innovation,
                                     double step) {
  const int d = static_cast<int>(w.rows());
  if (innovation.size() != d || energy.size() != d || w_inv.rows() != d)
    throw std::invalid_argument("update_demixing_rows: dimension mismatch");
  if (step <= 0.0 || step >= 1.0)
    throw std::invalid_argument("update_demixing_rows: step must be in (0, 1)");

  // Natural-gradient independence step (extended infomax, super-Gaussian
  // contrast). The y y^T term decorrelates and normalizes the outputs; the
  // tanh(y) y^T term rotates toward statistically independent ones. Working
  // on innovations rather than raw values matters: serial correlation
  // averages the values toward Gaussianity, which starves any
  // independence-seeking update of its signal. Updates from samples whose
  // output energy exceeds a few units per component are rescaled so a
  // heavy-tailed burst cannot catapult the matrix; typical samples --
  // including the moderately loud spikes that carry the non-Gaussianity
  // signal -- get the full step.
  const Eigen::VectorXd y = w * innovation;
  energy += y.cwiseProduct(y);
  const Eigen::VectorXd ty = y.array().tanh();
  const Eigen::MatrixXd delta =
      Eigen::MatrixXd::Identity(d, d) - ty * y.transpose() - y * y.transpose();
  const double denom = std::max(1.0, y.squaredNorm() / (4.0 * d));
  const Eigen::MatrixXd w_new = w + (step / denom) * delta * w;
  const Eigen::MatrixXd w_inv_new = w_new.inverse();
  // A step that would land on a singular matrix is skipped outright.
  if (w_new.allFinite() && w_inv_new.allFinite()) {
    w = w_new;
    w_inv = w_inv_new;
  }
  return y;
}

StreamingEngine::StreamingEngine(int d, EngineConfig cfg)
    : d_(d), cfg_(std::move(cfg)) {
  cfg_.validate(d);
  tau_unit_effective_ = cfg_.tau_unit;
  buffer_.reserve(static_cast<size_t>(cfg_.n_window));
  var_a_ = Eigen::MatrixXd::Zero(d_, d_ * cfg_.var_lags);
  // Large initial P: the first recursive updates behave like an unregularized
  // least-squares fit over the first few samples.
  var_p_ = 100.0 * Eigen::MatrixXd::Identity(d_ * cfg_.var_lags,
                                             d_ * cfg_.var_lags);
}

// Folds the newest observation into the auxiliary autoregression: computes
// the one-step innovation against the pre-update coefficients, then performs
// one forgetting-factor recursive-least-squares step shared by all d output
// rows.
void StreamingEngine::ingest_innovation(const Eigen::VectorXd& x) {
  const int lags = cfg_.var_lags;
  if (var_mean_.size() == 0)
    var_mean_ = x;
  else
    var_mean_ = cfg_.mu * var_mean_ + (1.0 - cfg_.mu) * x;
  const size_t n = buffer_.size();  // buffer_ already ends with x
  if (static_cast<int>(n) < lags + 1) return;

  Eigen::VectorXd z(d_ * lags);
  for (int l = 0; l < lags; ++l)
    z.segment(l * d_, d_) = buffer_[n - 2 - static_cast<size_t>(l)] - var_mean_;
  const Eigen::VectorXd innov = (x - var_mean_) - var_a_ * z;
  last_innov_ = innov;

  const Eigen::VectorXd pz = var_p_ * z;
  const Eigen::VectorXd gain = pz / (cfg_.mu + z.dot(pz));
  var_p_ = (var_p_ - gain * pz.transpose()) / cfg_.mu;
  var_p_ = 0.5 * (var_p_ + var_p_.transpose());  // keep symmetric under drift
  var_a_ += innov * gain.transpose();

  innov_ring_.push_back(innov);
  if (static_cast<int>(innov_ring_.size()) > cfg_.n_window)
    innov_ring_.erase(innov_ring_.begin());
}

double StreamingEngine::current_tau() const {
  const long scored = cfg_.n_window - cfg_.h + 1;
  return tau_unit_effective_ * d_ * static_cast<double>(scored);
}

Eigen::MatrixXd StreamingEngine::current_window() const {
  Eigen::MatrixXd window(d_, static_cast<Eigen::Index>(buffer_.size()));
  for (size_t j = 0; j < buffer_.size(); ++j)
    window.col(static_cast<Eigen::Index>(j)) = buffer_[j];
  return window;
}

void StreamingEngine::ensure_fresh_factors(int regime_idx) {
  Regime& regime = regimes_[regime_idx];
  UpdateState& update = update_states_[regime_idx];
  for (int i = 0; i < d_; ++i) {
    if (!update.eigen_dirty[i]) continue;
    const int k = regime.factors[i].k();
    regime.factors[i] = stabilize(refresh_eigen(update.trans[i], k));
    update.eigen_dirty[i] = false;
  }
}

void StreamingEngine::adopt_fit(int regime_idx, const InitialStateFit& fit,
                                const Eigen::MatrixXd& window) {
  candidate_.active_regime_index = regime_idx;
  candidate_.s0 = fit.s0;
  candidate_.window_start = t_count_ - cfg_.n_window;
  candidate_.delay.resize(static_cast<size_t>(d_));
  const Regime& regime = regimes_[regime_idx];
  // Latest state of each demixed signal: its newest delay vector.
  // Conditioning on the most recent samples keeps the forecast responsive;
  // rolling the window-start fit forward instead would average the whole
  // window and decay toward the mean.
  const Eigen::MatrixXd signals = regime.w * (window.colwise() - regime.mean);
  for (int i = 0; i < d_; ++i) {
    const Eigen::VectorXd sig = signals.row(i).transpose();
    candidate_.delay[i] = embed(sig, regime.factors[i].h(), window.cols() - 1);
  }
  // Per-coordinate dynamic range of the observed window, for forecast
  // clipping.
  candidate_.scale = ((window.colwise() - regime.mean).cwiseAbs2().rowwise()
                          .mean()).cwiseSqrt();
}

StreamingEngine::EstimatorOutcome
StreamingEngine::mode_estimator(const Eigen::MatrixXd& window) {
  
  EstimatorOutcome outcome;
  const double scale = window_scale(window);
  // Out-of-sample innovations of the recent past, for creation-time ICA.
  Eigen::MatrixXd innov(d_, static_cast<Eigen::Index>(innov_ring_.size()));
  for (size_t j = 0; j < innov_ring_.size(); ++j)
    innov.col(static_cast<Eigen::Index>(j)) = innov_ring_[j];

  if (regimes_.empty()) {
    auto [regime, update] = regime_creation(window, cfg_, &innov);
    regimes_.push_back(std::move(regime));
    update_states_.push_back(std::move(update));
    const InitialStateFit fit =
        optimize_initial_state(window, regimes_[0], nullptr, cfg_.lm);
    adopt_fit(0, fit, window);
    if (cfg_.tau_unit <= 0.0) {
      const long scored = window.cols() - cfg_.h + 1;
      const double score = regime_score(window, regimes_[0], fit.f, scale);
      tau_unit_effective_ =
          cfg_.tau_auto_scale * score / (d_ * static_cast<double>(scored));
      tau_unit_effective_ = std::max(tau_unit_effective_, 1e-12);
    }
    outcome.f = fit.f;
    outcome.created = true;
    return outcome;
  }

  const int active = candidate_.active_regime_index;
  ensure_fresh_factors(active);
  InitialStateFit best =
      optimize_initial_state(window, regimes_[active], nullptr, cfg_.lm);
  int best_idx = active;
  double best_score = regime_score(window, regimes_[active], best.f, scale);
  const double tau = current_tau();

  if (best_score > tau && regimes_.size() > 1) {
    // Cheap pass over every regime, then polish the winner.
    LevMarOptions cheap = cfg_.lm;
    cheap.max_iter = cfg_.search_lm_iters;
    int argmin = best_idx;
    double argmin_score = best_score;
    InitialStateFit argmin_fit = best;
    for (int r = 0; r < static_cast<int>(regimes_.size()); ++r) {
      if (r == active) continue;
      ensure_fresh_factors(r);
      const InitialStateFit fit =
          optimize_initial_state(window, regimes_[r], nullptr, cheap);
      const double score = regime_score(window, regimes_[r], fit.f, scale);
      if (score < argmin_score) {
        argmin = r;
        argmin_score = score;
        argmin_fit = fit;
      }
    }
    if (argmin != active) {
      const InitialStateFit polished = optimize_initial_state(
          window, regimes_[argmin], &argmin_fit.s0, cfg_.lm);
      const double score = regime_score(window, regimes_[argmin], polished.f, scale);
      if (score < best_score) {
        best = polished;
        best_idx = argmin;
        best_score = score;
      }
    }
  }

  if (best_score > tau) {
    ++pending_create_;
    if (pending_create_ >= cfg_.creation_delay) {
      pending_create_ = 0;
      auto [regime, update] = regime_creation(window, cfg_, &innov);
      const InitialStateFit fit =
          optimize_initial_state(window, regime, nullptr, cfg_.lm);
      const double cand_score = regime_score(window, regime, fit.f, scale);
      if (cand_score < cfg_.creation_gain * best_score) {
        regimes_.push_back(std::move(regime));
        update_states_.push_back(std::move(update));
        const int idx = static_cast<int>(regimes_.size()) - 1;
        adopt_fit(idx, fit, window);
        outcome.f = fit.f;
        outcome.created = true;
        return outcome;
      }
      // No regime, new or old, fits this window well; ride it out on the
      // best existing one rather than spawning a duplicate.
    }
  } else {
    pending_create_ = 0;
  }

  outcome.switched = best_idx != active;
  // A switch means an existing regime absorbed the change; restart the
  // evidence run before considering a brand-new regime.
  if (outcome.switched) pending_create_ = 0;
  adopt_fit(best_idx, best, window);
  outcome.f = best.f;
  return outcome;
}

std::pair<Eigen::VectorXd, CausalAdjacency>
StreamingEngine::mode_generator() const {
  const Regime& regime = regimes_[candidate_.active_regime_index];
  const UpdateState& update = update_states_[candidate_.active_regime_index];
  Eigen::VectorXd e(d_);
  // Advance each signal's newest delay vector l_s steps with its transition
  // matrix. This equals evolving the projected latent state through the
  // eigenbasis, but stays numerically stable when the eigenvectors are
  // nearly parallel.
  for (int i = 0; i < d_; ++i) {
    Eigen::VectorXd v = candidate_.delay[i];
    for (int s = 0; s < cfg_.l_s; ++s) v = update.trans[i].a * v;
    e[i] = v[0];
  }
  // Shrink each coordinate by its measured forecast reliability, and clip to
  // the window's dynamic range: a transiently wrong transition or demixing
  // estimate then degrades toward the regime mean instead of emitting
  // confident junk.
  Eigen::VectorXd forecast = regime.w_inv * e;
  for (int j = 0; j < d_; ++j) {
    if (fc_mse_.size() == d_) {
      const double var = std::max(dev_var_[j], 1e-12);
      forecast[j] *= std::max(0.0, 1.0 - fc_mse_[j] / var);
    }
    const double bound = 3.0 * candidate_.scale[j];
    forecast[j] = std::clamp(forecast[j], -bound, bound);
  }
  forecast += regime.mean;
  CausalIdentifyResult causal =
      identify_causality(regime.w, cfg_.edge_threshold);
  return {std::move(forecast), std::move(causal.adjacency)};
}

void StreamingEngine::regime_updater(const Eigen::MatrixXd& window) {
  const int idx = candidate_.active_regime_index;
  Regime& regime = regimes_[idx];
  UpdateState& update = update_states_[idx];
  const Eigen::Index m = window.cols();

  // Track the regime mean alongside the demixing matrix: a stale mean leaves
  // a constant offset in the centered samples, which would bias the column
  // tracker away from its stationary point.
  regime.mean = cfg_.mu * regime.mean + (1.0 - cfg_.mu) * window.col(m - 1);
  // The identity-demixing ablation keeps W fixed; only the full model tracks it.
  if (!cfg_.freeze_identity_w && last_innov_.size() == d_)
    update_demixing_rows(regime.w, regime.w_inv, update.energy, last_innov_,
                         cfg_.w_step);

  if (m < cfg_.h + 1) return;  // cannot form two delay vectors yet
  const Eigen::MatrixXd signals = regime.w * (window.colwise() - regime.mean);
  for (int i = 0; i < d_; ++i) {
    const Eigen::VectorXd sig = signals.row(i).transpose();
    const DelayVector prev = embed(sig, cfg_.h, m - 2);
    const DelayVector next = embed(sig, cfg_.h, m - 1);
    update.trans[i] = rls_step(update.trans[i], prev, next);
    update.eigen_dirty[i] = true;
  }
}

StepOutput StreamingEngine::process_tick(const Eigen::VectorXd& x) {
  if (x.size() != d_)
    throw std::invalid_argument("process_tick: dimension mismatch");
  if (!x.allFinite())
    throw std::invalid_argument("process_tick: non-finite input rejected");

  StepOutput out;
  out.t = t_count_;

  buffer_.push_back(x);
  if (static_cast<int>(buffer_.size()) > cfg_.n_window)
    buffer_.erase(buffer_.begin());
  ++t_count_;
  ingest_innovation(x);

  // Settle forecasts whose target tick has arrived into the per-coordinate
  // reliability statistics.
  const long now = t_count_ - 1;
  while (!pending_forecasts_.empty() && pending_forecasts_.front().first <= now) {
    if (pending_forecasts_.front().first == now) {
      const Eigen::VectorXd err = x - pending_forecasts_.front().second;
      const Eigen::VectorXd dev = x - var_mean_;
      if (fc_mse_.size() != d_) {
        fc_mse_ = err.cwiseAbs2();
        dev_var_ = dev.cwiseAbs2();
      } else {
        fc_mse_ = cfg_.mu * fc_mse_ + (1.0 - cfg_.mu) * err.cwiseAbs2();
        dev_var_ = cfg_.mu * dev_var_ + (1.0 - cfg_.mu) * dev.cwiseAbs2();
      }
    }
    pending_forecasts_.erase(pending_forecasts_.begin());
  }

  if (static_cast<int>(buffer_.size()) < cfg_.n_window) return out;

  // Atomic tick: any failure rolls back to the pre-tick model state.
  const auto regimes_snapshot = regimes_;
  const auto updates_snapshot = update_states_;
  const auto candidate_snapshot = candidate_;
  const double tau_snapshot = tau_unit_effective_;
  const int pending_snapshot = pending_create_;
  try {
    const Eigen::MatrixXd window = current_window();
    const EstimatorOutcome est = mode_estimator(window);
    auto [forecast, causal] = mode_generator();
    if (cfg_.l_s > 0)
      pending_forecasts_.emplace_back(now + cfg_.l_s, forecast);
    if (!est.created) regime_updater(window);

    out.warmup = false;
    out.forecast = std::move(forecast);
    out.causal = std::move(causal);
    out.regime_id = candidate_.active_regime_index;
    out.created_new = est.created;
    out.switched = est.switched;
    out.fit_error = est.f;
    return out;
  } catch (...) {
    regimes_ = regimes_snapshot;
    update_states_ = updates_snapshot;
    candidate_ = candidate_snapshot;
    tau_unit_effective_ = tau_snapshot;
    pending_create_ = pending_snapshot;
    throw;
  }
}

}  // namespace modeplait
