#include "modeplait/engine.hpp"

#include <cmath>
#include <limits>

#include "doctest.h"
#include "modeplait/metrics.hpp"
#include "modeplait/synth.hpp"

using namespace modeplait;

namespace {

// Single-component regime for one signal: phi(0, 0) = 1 so the generated
// value at scored step p is Re(lambda^p * s0).
Regime scalar_regime(std::complex<double> lambda, int h) {
  Regime r;
  r.w = Eigen::MatrixXd::Identity(1, 1);
  r.w_inv = r.w;
  r.mean = Eigen::VectorXd::Zero(1);
  SelfDynamicsFactor f;
  f.phi = Eigen::MatrixXcd::Ones(h, 1);
  for (int p = 1; p < h; ++p) f.phi(p, 0) = std::pow(lambda, -p);
  f.lambda = Eigen::VectorXcd::Constant(1, lambda);
  r.factors.push_back(std::move(f));
  return r;
}

Eigen::MatrixXd damped_window(int n) {
  Eigen::MatrixXd w(2, n);
  for (int t = 0; t < n; ++t) {
    w(0, t) = std::pow(0.9, t) * std::cos(0.7 * t);
    w(1, t) = 1.5 * std::pow(0.8, t);
  }
  return w;
}

// Identity demixing and no centering, so the rows stay exactly low-rank
// linear dynamics and a perfect fit exists.
Regime uncentered_regime(const Eigen::MatrixXd& window, int h) {
  Regime r;
  const int d = static_cast<int>(window.rows());
  r.w = Eigen::MatrixXd::Identity(d, d);
  r.w_inv = r.w;
  r.mean = Eigen::VectorXd::Zero(d);
  for (int i = 0; i < d; ++i) {
    auto [factor, trans] = estimate_factor(window.row(i).transpose(), h, 1.0);
    r.factors.push_back(std::move(factor));
  }
  return r;
}

}  // namespace

TEST_CASE("EngineConfig::validate rejects bad settings") {
  EngineConfig cfg;
  CHECK_NOTHROW(cfg.validate(3));
  CHECK_THROWS(cfg.validate(0));

  EngineConfig bad = cfg;
  bad.n_window = bad.h;
  CHECK_THROWS(bad.validate(3));

  bad = cfg;
  bad.mu = 0.0;
  CHECK_THROWS(bad.validate(3));

  bad = cfg;
  bad.tau_unit = 0.0;
  bad.tau_auto_scale = 0.0;
  CHECK_THROWS(bad.validate(3));
}

TEST_CASE("fit_error on a hand-built geometric regime") {
  const Regime r = scalar_regime(0.5, 2);
  std::vector<LatentState> s0{LatentState::Constant(1, 1.0)};

  Eigen::MatrixXd exact(1, 4);
  exact << 3.0, 1.0, 0.5, 0.25;  // col 0 precedes the scored range
  CHECK(fit_error(exact, s0, r) == doctest::Approx(0.0));

  Eigen::MatrixXd off = exact;
  off(0, 1) = 2.0;
  CHECK(fit_error(off, s0, r) == doctest::Approx(1.0));

  off(0, 3) = 0.25 + 0.5;
  CHECK(fit_error(off, s0, r) == doctest::Approx(1.5));

  CHECK_THROWS((void)fit_error(Eigen::MatrixXd::Zero(1, 1), s0, r));
  CHECK_THROWS((void)fit_error(exact, {}, r));
}

TEST_CASE("optimize_initial_state reaches a near-exact fit on linear data") {
  const Eigen::MatrixXd window = damped_window(24);
  const Regime regime = uncentered_regime(window, 4);
  LevMarOptions lm;

  const InitialStateFit fit =
      optimize_initial_state(window, regime, nullptr, lm);
  CHECK(fit.f < 1e-5);
  CHECK(fit.f == doctest::Approx(fit_error(window, fit.s0, regime)));
}

TEST_CASE("optimize_initial_state never returns worse than its start") {
  const Eigen::MatrixXd window = damped_window(24);
  const Regime regime = uncentered_regime(window, 4);
  LevMarOptions lm;

  std::vector<LatentState> zeros;
  for (const auto& f : regime.factors)
    zeros.push_back(LatentState::Zero(f.k()));
  const double f_zeros = fit_error(window, zeros, regime);
  const InitialStateFit fit =
      optimize_initial_state(window, regime, &zeros, lm);
  CHECK(fit.f <= f_zeros);
  CHECK(fit.f < 1e-5);

  LevMarOptions no_iters;
  no_iters.max_iter = 0;
  const InitialStateFit frozen =
      optimize_initial_state(window, regime, &zeros, no_iters);
  CHECK(frozen.f <= f_zeros);
}

TEST_CASE("regime_creation recovers the generating structure") {
  GenConfig gen;
  gen.d = 4;
  gen.sequence = {1};
  gen.segment_len = 400;
  gen.seed = 3;
  const SynthStream s = generate_stream(gen);

  EngineConfig cfg;
  cfg.n_window = 400;
  cfg.seed = 3;
  auto [regime, update] = regime_creation(s.x, cfg);
  CHECK(regime.dims() == 4);
  CHECK(regime.factors.size() == 4);
  CHECK((regime.w * regime.w_inv -
         Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-8);

  const auto causal = identify_causality(regime.w, cfg.edge_threshold);
  const CausalDigraph truth =
      binarize(s.truth.cluster_b[0], cfg.edge_threshold);
  CHECK(shd(truth, causal.digraph) <= 2);

  EngineConfig frozen = cfg;
  frozen.freeze_identity_w = true;
  auto [rf, uf] = regime_creation(s.x, frozen);
  CHECK(rf.w == Eigen::MatrixXd::Identity(4, 4));
}

TEST_CASE("update_demixing_rows hand-worked cases") {
  // Axis-aligned over-strong sample: only the excited output is rescaled
  // down (toward unit variance); the quiet one is nudged up.
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
  Eigen::MatrixXd w_inv = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd energy = Eigen::VectorXd::Ones(2);
  Eigen::VectorXd x(2);
  x << 2.0, 0.0;
  const Eigen::VectorXd y = update_demixing_rows(w, w_inv, energy, x, 0.1);
  CHECK(y[0] == doctest::Approx(2.0));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(energy[0] == doctest::Approx(5.0));
  CHECK(energy[1] == doctest::Approx(1.0));
  // delta = I - tanh(y) y^T - y y^T = diag(1 - 2 tanh(2) - 4, 1);
  // ||y||^2 = 4 < 4d = 8, so the full step applies.
  const double d00 = 1.0 + 0.1 * (1.0 - 2.0 * std::tanh(2.0) - 4.0);
  CHECK(w(0, 0) == doctest::Approx(d00));
  CHECK(w(0, 1) == doctest::Approx(0.0));
  CHECK(w(1, 0) == doctest::Approx(0.0));
  CHECK(w(1, 1) == doctest::Approx(1.1));
  CHECK(w_inv(0, 0) == doctest::Approx(1.0 / d00));
  CHECK(w_inv(1, 1) == doctest::Approx(1.0 / 1.1));

  // Correlated sample: symmetric off-diagonal decorrelating pull.
  w = Eigen::MatrixXd::Identity(2, 2);
  w_inv = Eigen::MatrixXd::Identity(2, 2);
  energy = Eigen::VectorXd::Ones(2);
  x << 1.0, 1.0;
  const Eigen::VectorXd y2 = update_demixing_rows(w, w_inv, energy, x, 0.1);
  CHECK(y2[0] == doctest::Approx(1.0));
  CHECK(y2[1] == doctest::Approx(1.0));
  CHECK(energy[0] == doctest::Approx(2.0));
  CHECK(energy[1] == doctest::Approx(2.0));
  const double t1 = std::tanh(1.0);
  CHECK(w(0, 0) == doctest::Approx(1.0 - 0.1 * t1));
  CHECK(w(1, 1) == doctest::Approx(1.0 - 0.1 * t1));
  CHECK(w(0, 1) == doctest::Approx(-0.1 * (1.0 + t1)));
  CHECK(w(1, 0) == doctest::Approx(-0.1 * (1.0 + t1)));
  CHECK((w * w_inv - Eigen::MatrixXd::Identity(2, 2)).norm() ==
        doctest::Approx(0.0).epsilon(1e-12));

  // Zero input: pure unit-variance pressure inflates both outputs equally.
  w = Eigen::MatrixXd::Identity(2, 2);
  w_inv = Eigen::MatrixXd::Identity(2, 2);
  energy = Eigen::VectorXd::Zero(2);
  x.setZero();
  const Eigen::VectorXd y3 = update_demixing_rows(w, w_inv, energy, x, 0.1);
  CHECK(y3.isZero());
  CHECK(energy.isZero());
  CHECK(w.isApprox(1.1 * Eigen::MatrixXd::Identity(2, 2)));

  CHECK_THROWS((void)update_demixing_rows(w, w_inv, energy,
                                          Eigen::VectorXd::Zero(3), 0.1));
  CHECK_THROWS((void)update_demixing_rows(w, w_inv, energy,
                                          Eigen::VectorXd::Zero(2), 0.0));
}

TEST_CASE("process_tick warm-up contract and first regime") {
  GenConfig gen;
  gen.d = 3;
  gen.sequence = {1};
  gen.segment_len = 120;
  gen.seed = 5;
  const SynthStream s = generate_stream(gen);

  EngineConfig cfg;
  cfg.seed = 5;
  StreamingEngine engine(3, cfg);

  for (long t = 0; t < cfg.n_window - 1; ++t) {
    const StepOutput out = engine.process_tick(s.x.col(t));
    CHECK(out.warmup);
    CHECK(out.t == t);
    CHECK(out.forecast.size() == 0);
    CHECK(engine.regime_count() == 0);
  }

  const StepOutput first = engine.process_tick(s.x.col(cfg.n_window - 1));
  CHECK_FALSE(first.warmup);
  CHECK(first.created_new);
  CHECK(first.regime_id == 0);
  CHECK(engine.regime_count() == 1);
  REQUIRE(first.forecast.size() == 3);
  CHECK(first.forecast.allFinite());
  CHECK(first.causal.b.diagonal().isZero());
  CHECK(engine.current_tau() > 0.0);

  for (long t = cfg.n_window; t < 120; ++t) {
    const StepOutput out = engine.process_tick(s.x.col(t));
    CHECK_FALSE(out.warmup);
    CHECK(out.forecast.allFinite());
    CHECK(out.regime_id >= 0);
    CHECK(out.fit_error >= 0.0);
  }
  CHECK(engine.ticks_seen() == 120);
}

TEST_CASE("process_tick rejects bad input without losing state") {
  EngineConfig cfg;
  StreamingEngine engine(2, cfg);
  CHECK_THROWS(engine.process_tick(Eigen::VectorXd::Zero(3)));

  Eigen::VectorXd nan_in(2);
  nan_in << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(engine.process_tick(nan_in), std::invalid_argument);
  CHECK(engine.ticks_seen() == 0);

  CHECK_NOTHROW(engine.process_tick(Eigen::VectorXd::Ones(2)));
  CHECK(engine.ticks_seen() == 1);
}

TEST_CASE("engine runs are deterministic per seed") {
  GenConfig gen;
  gen.d = 3;
  gen.sequence = {1, 2};
  gen.segment_len = 90;
  gen.seed = 21;
  const SynthStream s = generate_stream(gen);

  EngineConfig cfg;
  cfg.seed = 21;
  StreamingEngine a(3, cfg), b(3, cfg);
  for (long t = 0; t < s.x.cols(); ++t) {
    const StepOutput oa = a.process_tick(s.x.col(t));
    const StepOutput ob = b.process_tick(s.x.col(t));
    CHECK(oa.warmup == ob.warmup);
    CHECK(oa.regime_id == ob.regime_id);
    if (!oa.warmup) {
      CHECK(oa.forecast == ob.forecast);
      CHECK(oa.causal.b == ob.causal.b);
      CHECK(oa.fit_error == ob.fit_error);
    }
  }
  CHECK(a.regime_count() == b.regime_count());
}

TEST_CASE("a stationary stream does not splinter into many regimes") {
  GenConfig gen;
  gen.d = 3;
  gen.sequence = {1};
  gen.segment_len = 400;
  gen.seed = 13;
  const SynthStream s = generate_stream(gen);

  EngineConfig cfg;
  cfg.seed = 13;
  StreamingEngine engine(3, cfg);
  for (long t = 0; t < s.x.cols(); ++t)
    (void)engine.process_tick(s.x.col(t));
  CHECK(engine.regime_count() <= 2);
}
