// pybind11 surface over the streaming core: the main operations (ICA,
// mode estimation, causal identification, metrics, synthetic generation)
// plus the StreamingEngine itself.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "modeplait/causal.hpp"
#include "modeplait/embedding.hpp"
#include "modeplait/engine.hpp"
#include "modeplait/ica.hpp"
#include "modeplait/metrics.hpp"
#include "modeplait/mode_dynamics.hpp"
#include "modeplait/synth.hpp"

namespace py = pybind11;
using namespace modeplait;

namespace {

CausalDigraph digraph_from_bool(
    const Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>& adj) {
  return CausalDigraph{adj};
}

}  // namespace

PYBIND11_MODULE(_modeplait, m) {
  m.doc() = "Streaming regime discovery, time-evolving causal "
            "identification and forecasting";

  py::register_exception<DegenerateInputError>(m, "DegenerateInputError");

  // ---- embedding
  m.def("embed", &embed, py::arg("series"), py::arg("h"), py::arg("t"));
  m.def("build_hankel", &build_hankel, py::arg("series"), py::arg("h"));
  m.def("invert_embed",
        [](const Eigen::VectorXd& v) { return invert_embed(v); },
        py::arg("delay_vector"));

  // ---- ica
  py::class_<IcaConfig>(m, "IcaConfig")
      .def(py::init<>())
      .def_readwrite("max_iter", &IcaConfig::max_iter)
      .def_readwrite("tol", &IcaConfig::tol)
      .def_readwrite("seed", &IcaConfig::seed);
  py::class_<IcaResult>(m, "IcaResult")
      .def_readonly("w", &IcaResult::w)
      .def_readonly("e", &IcaResult::e)
      .def_readonly("mean", &IcaResult::mean)
      .def_readonly("converged", &IcaResult::converged);
  m.def("fixed_point_ica",
        [](const Eigen::MatrixXd& x, const IcaConfig& cfg) {
          return fixed_point_ica(x, cfg);
        },
        py::arg("x"), py::arg("config") = IcaConfig{});

  // ---- mode dynamics
  py::class_<SelfDynamicsFactor>(m, "SelfDynamicsFactor")
      .def_readonly("phi", &SelfDynamicsFactor::phi)
      .def_readonly("lambda_", &SelfDynamicsFactor::lambda)
      .def_readonly("degenerate", &SelfDynamicsFactor::degenerate)
      .def("k", &SelfDynamicsFactor::k)
      .def("h", &SelfDynamicsFactor::h);
  py::class_<TransitionState>(m, "TransitionState")
      .def_readonly("a", &TransitionState::a)
      .def_readonly("p", &TransitionState::p)
      .def_readonly("mu", &TransitionState::mu);
  m.def("estimate_factor", &estimate_factor, py::arg("signal"), py::arg("h"),
        py::arg("mu"));
  m.def("rls_step", &rls_step, py::arg("state"), py::arg("prev_embed"),
        py::arg("new_embed"));
  m.def("refresh_eigen", &refresh_eigen, py::arg("state"), py::arg("k"));
  m.def("evolve", &evolve, py::arg("s"), py::arg("factor"), py::arg("steps"));
  m.def("reconstruct", &reconstruct, py::arg("s"), py::arg("factor"));

  // ---- causal identification
  py::class_<CausalAdjacency>(m, "CausalAdjacency")
      .def(py::init([](const Eigen::MatrixXd& b) {
        return CausalAdjacency{b};
      }))
      .def_readonly("b", &CausalAdjacency::b);
  py::class_<CausalDigraph>(m, "CausalDigraph")
      .def(py::init(&digraph_from_bool))
      .def_property_readonly(
          "adjacency",
          [](const CausalDigraph& g) {
            return g.adjacency.cast<int>().eval();
          })
      .def("has_edge", &CausalDigraph::has_edge, py::arg("cause"),
           py::arg("effect"))
      .def("dims", &CausalDigraph::dims);
  py::class_<CausalIdentifyResult>(m, "CausalIdentifyResult")
      .def_readonly("adjacency", &CausalIdentifyResult::adjacency)
      .def_readonly("digraph", &CausalIdentifyResult::digraph)
      .def_readonly("causal_order", &CausalIdentifyResult::causal_order)
      .def_readonly("exact", &CausalIdentifyResult::exact);
  m.def("identify_causality", &identify_causality, py::arg("w"),
        py::arg("edge_threshold"));
  m.def("binarize", &binarize, py::arg("b"), py::arg("edge_threshold"));
  m.def("is_acyclic", &is_acyclic, py::arg("graph"));

  // ---- metrics
  m.def("shd", &shd, py::arg("truth"), py::arg("est"));
  m.def("sid", &sid, py::arg("truth"), py::arg("est"));
  m.def("rmse", &rmse, py::arg("pred"), py::arg("actual"));
  m.def("mae", &mae, py::arg("pred"), py::arg("actual"));

  // ---- synthetic streams
  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("d", &GenConfig::d)
      .def_readwrite("edge_density", &GenConfig::edge_density)
      .def_readwrite("weight_low", &GenConfig::weight_low)
      .def_readwrite("weight_high", &GenConfig::weight_high)
      .def_readwrite("segment_len", &GenConfig::segment_len)
      .def_readwrite("sequence", &GenConfig::sequence)
      .def_readwrite("ar_coeff_low", &GenConfig::ar_coeff_low)
      .def_readwrite("ar_coeff_high", &GenConfig::ar_coeff_high)
      .def_readwrite("ar_noise_var_low", &GenConfig::ar_noise_var_low)
      .def_readwrite("ar_noise_var_high", &GenConfig::ar_noise_var_high)
      .def_readwrite("value_mix", &GenConfig::value_mix)
      .def_readwrite("value_decay_low", &GenConfig::value_decay_low)
      .def_readwrite("value_decay_high", &GenConfig::value_decay_high)
      .def_readwrite("value_freq_low", &GenConfig::value_freq_low)
      .def_readwrite("value_freq_high", &GenConfig::value_freq_high)
      .def_readwrite("redraw_ar_per_segment", &GenConfig::redraw_ar_per_segment)
      .def_readwrite("seed", &GenConfig::seed);
  py::class_<Segment>(m, "Segment")
      .def_readonly("start", &Segment::start)
      .def_readonly("end", &Segment::end)
      .def_readonly("cluster_id", &Segment::cluster_id);
  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("cluster_b", &GroundTruth::cluster_b)
      .def_readonly("segments", &GroundTruth::segments)
      .def("cluster_at", &GroundTruth::cluster_at, py::arg("t"));
  py::class_<SynthStream>(m, "SynthStream")
      .def_readonly("x", &SynthStream::x)
      .def_readonly("e", &SynthStream::e)
      .def_readonly("truth", &SynthStream::truth);
  m.def("generate_stream", &generate_stream, py::arg("config"));

  // ---- streaming engine
  py::class_<EngineConfig>(m, "EngineConfig")
      .def(py::init<>())
      .def_readwrite("n_window", &EngineConfig::n_window)
      .def_readwrite("h", &EngineConfig::h)
      .def_readwrite("mu", &EngineConfig::mu)
      .def_readwrite("tau_unit", &EngineConfig::tau_unit)
      .def_readwrite("tau_auto_scale", &EngineConfig::tau_auto_scale)
      .def_readwrite("l_s", &EngineConfig::l_s)
      .def_readwrite("edge_threshold", &EngineConfig::edge_threshold)
      .def_readwrite("creation_delay", &EngineConfig::creation_delay)
      .def_readwrite("creation_gain", &EngineConfig::creation_gain)
      .def_readwrite("var_lags", &EngineConfig::var_lags)
      .def_readwrite("w_step", &EngineConfig::w_step)
      .def_readwrite("seed", &EngineConfig::seed)
      .def_readwrite("freeze_identity_w", &EngineConfig::freeze_identity_w);
  py::class_<StepOutput>(m, "StepOutput")
      .def_readonly("warmup", &StepOutput::warmup)
      .def_readonly("t", &StepOutput::t)
      .def_readonly("forecast", &StepOutput::forecast)
      .def_property_readonly(
          "causal_b", [](const StepOutput& s) { return s.causal.b; })
      .def_readonly("regime_id", &StepOutput::regime_id)
      .def_readonly("created_new", &StepOutput::created_new)
      .def_readonly("switched", &StepOutput::switched)
      .def_readonly("fit_error", &StepOutput::fit_error);
  py::class_<StreamingEngine>(m, "StreamingEngine")
      .def(py::init<int, EngineConfig>(), py::arg("d"),
           py::arg("config") = EngineConfig{})
      .def("process_tick", &StreamingEngine::process_tick, py::arg("x"))
      .def("dims", &StreamingEngine::dims)
      .def("ticks_seen", &StreamingEngine::ticks_seen)
      .def("regime_count", &StreamingEngine::regime_count)
      .def("current_tau", &StreamingEngine::current_tau);
}
