// Command-line surface: `gen` synthesizes ground-truthed streams, `run`
// drives the streaming engine over a CSV, `eval` scores run outputs against
// ground truth, `bench` measures per-tick latency.
//
// Exit codes: 0 success, 1 internal error, 2 usage/input error.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "modeplait/engine.hpp"
#include "modeplait/metrics.hpp"
#include "modeplait/synth.hpp"

using json = nlohmann::json;
using namespace modeplait;

namespace {

constexpr int kExitUsage = 2;
constexpr int kEvalStride = 25;  // causal.jsonl sampling period

struct RunConfig {
  GenConfig gen;
  EngineConfig eng;
  std::string sequence_str = "1,2,1";
};

std::vector<int> parse_sequence(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    size_t pos = 0;
    const int v = std::stoi(item, &pos);
    if (pos != item.size()) throw std::invalid_argument("bad sequence entry");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty sequence");
  return out;
}

// One entry per recognized config key: how to read it from a string and how
// to tell whether the matching CLI flag was given.
struct ConfigKey {
  std::function<void(RunConfig&, const std::string&)> set;
  CLI::Option* opt = nullptr;
};

using KeyTable = std::map<std::string, ConfigKey>;

template <typename T>
T parse_value(const std::string& raw) {
  std::istringstream ss(raw);
  T v{};
  ss >> v;
  if (ss.fail()) throw std::invalid_argument("cannot parse value: " + raw);
  return v;
}

template <>
bool parse_value<bool>(const std::string& raw) {
  if (raw == "true" || raw == "1") return true;
  if (raw == "false" || raw == "0") return false;
  throw std::invalid_argument("cannot parse bool: " + raw);
}

// Registers --<key> on the app and records the file-side setter.
template <typename T>
void add_key(CLI::App* app, KeyTable& table, const std::string& key,
             T* target, const std::string& help) {
  ConfigKey entry;
  entry.set = [target](RunConfig&, const std::string& raw) {
    *target = parse_value<T>(raw);
  };
  entry.opt = app->add_option("--" + key, *target, help);
  table[key] = std::move(entry);
}

KeyTable add_config_options(CLI::App* app, RunConfig& cfg) {
  // The embedding depth key is literally "h"; free the short help flag so
  // --h stays available.
  app->set_help_flag("--help", "print this help message and exit");
  KeyTable table;
  add_key(app, table, "d", &cfg.gen.d, "stream dimensionality");
  add_key(app, table, "edge_density", &cfg.gen.edge_density,
          "DAG edge probability");
  add_key(app, table, "weight_low", &cfg.gen.weight_low, "min |edge weight|");
  add_key(app, table, "weight_high", &cfg.gen.weight_high, "max |edge weight|");
  add_key(app, table, "segment_len", &cfg.gen.segment_len,
          "ticks per segment");
  add_key(app, table, "sequence", &cfg.sequence_str,
          "comma-separated cluster ids, e.g. 1,2,1");
  add_key(app, table, "ar_coeff_low", &cfg.gen.ar_coeff_low,
          "min log-variance AR coefficient");
  add_key(app, table, "ar_coeff_high", &cfg.gen.ar_coeff_high,
          "max log-variance AR coefficient");
  add_key(app, table, "ar_noise_var_low", &cfg.gen.ar_noise_var_low,
          "min log-variance innovation variance");
  add_key(app, table, "ar_noise_var_high", &cfg.gen.ar_noise_var_high,
          "max log-variance innovation variance");
  add_key(app, table, "value_mix", &cfg.gen.value_mix,
          "variance fraction carried by the predictable resonator");
  add_key(app, table, "value_decay_low", &cfg.gen.value_decay_low,
          "min resonator pole magnitude");
  add_key(app, table, "value_decay_high", &cfg.gen.value_decay_high,
          "max resonator pole magnitude");
  add_key(app, table, "value_freq_low", &cfg.gen.value_freq_low,
          "min resonator pole angle (rad)");
  add_key(app, table, "value_freq_high", &cfg.gen.value_freq_high,
          "max resonator pole angle (rad)");
  add_key(app, table, "redraw_ar_per_segment", &cfg.gen.redraw_ar_per_segment,
          "redraw AR parameters each segment");
  add_key(app, table, "seed", &cfg.gen.seed, "generator seed");
  add_key(app, table, "n_window", &cfg.eng.n_window, "sliding window length");
  add_key(app, table, "h", &cfg.eng.h, "delay-embedding depth");
  add_key(app, table, "mu", &cfg.eng.mu, "forgetting factor");
  add_key(app, table, "tau_unit", &cfg.eng.tau_unit,
          "regime threshold per unit (<= 0 auto-calibrates)");
  add_key(app, table, "tau_auto_scale", &cfg.eng.tau_auto_scale,
          "auto-calibration scale");
  add_key(app, table, "l_s", &cfg.eng.l_s, "forecast horizon");
  add_key(app, table, "edge_threshold", &cfg.eng.edge_threshold,
          "|b| cutoff for reported edges");
  add_key(app, table, "search_lm_iters", &cfg.eng.search_lm_iters,
          "iteration budget for the regime search pass");
  add_key(app, table, "var_lags", &cfg.eng.var_lags,
          "lag order of the auxiliary innovation VAR");
  add_key(app, table, "w_step", &cfg.eng.w_step,
          "per-tick demixing refinement step size");
  add_key(app, table, "engine_seed", &cfg.eng.seed, "engine seed");
  add_key(app, table, "freeze_identity_w", &cfg.eng.freeze_identity_w,
          "skip demixing estimation, fix W = I");
  add_key(app, table, "lm_max_iter", &cfg.eng.lm.max_iter,
          "fit iteration cap");
  add_key(app, table, "lm_rel_tol", &cfg.eng.lm.rel_tol,
          "fit relative tolerance");
  add_key(app, table, "ica_max_iter", &cfg.eng.ica.max_iter,
          "demixing iteration cap");
  add_key(app, table, "ica_tol", &cfg.eng.ica.tol,
          "demixing convergence tolerance");
  return table;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// key = value lines, # comments. File values fill in only keys the command
// line did not set.
void apply_config_file(const std::string& path, RunConfig& cfg,
                       const KeyTable& table) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("config", "cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw CLI::ValidationError(
          "config", path + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = table.find(key);
    if (it == table.end())
      throw CLI::ValidationError("config", path + ":" + std::to_string(lineno) +
                                               ": unknown key '" + key + "'");
    if (it->second.opt->count() > 0) continue;  // CLI wins
    it->second.set(cfg, value);
  }
}

void finalize_config(RunConfig& cfg) {
  cfg.gen.sequence = parse_sequence(cfg.sequence_str);
  cfg.eng.validate(cfg.gen.d);
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_rowmajor(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m(i, j));
  return out;
}

Eigen::MatrixXd matrix_from_rowmajor(const json& j, int d) {
  if (static_cast<int>(j.size()) != d * d)
    throw std::runtime_error("matrix size mismatch in json");
  Eigen::MatrixXd m(d, d);
  int idx = 0;
  for (int i = 0; i < d; ++i)
    for (int jj = 0; jj < d; ++jj) m(i, jj) = j[idx++].get<double>();
  return m;
}

json config_echo(const RunConfig& cfg) {
  return json{{"d", cfg.gen.d},
              {"edge_density", cfg.gen.edge_density},
              {"weight_low", cfg.gen.weight_low},
              {"weight_high", cfg.gen.weight_high},
              {"segment_len", cfg.gen.segment_len},
              {"sequence", cfg.gen.sequence},
              {"ar_coeff_low", cfg.gen.ar_coeff_low},
              {"ar_coeff_high", cfg.gen.ar_coeff_high},
              {"ar_noise_var_low", cfg.gen.ar_noise_var_low},
              {"ar_noise_var_high", cfg.gen.ar_noise_var_high},
              {"value_mix", cfg.gen.value_mix},
              {"value_decay_low", cfg.gen.value_decay_low},
              {"value_decay_high", cfg.gen.value_decay_high},
              {"value_freq_low", cfg.gen.value_freq_low},
              {"value_freq_high", cfg.gen.value_freq_high},
              {"redraw_ar_per_segment", cfg.gen.redraw_ar_per_segment},
              {"seed", cfg.gen.seed},
              {"n_window", cfg.eng.n_window},
              {"var_lags", cfg.eng.var_lags},
              {"w_step", cfg.eng.w_step},
              {"h", cfg.eng.h},
              {"mu", cfg.eng.mu},
              {"tau_unit", cfg.eng.tau_unit},
              {"tau_auto_scale", cfg.eng.tau_auto_scale},
              {"l_s", cfg.eng.l_s},
              {"edge_threshold", cfg.eng.edge_threshold}};
}

// ---------------------------------------------------------------- gen

int cmd_gen(const RunConfig& cfg, const std::string& prefix) {
  const SynthStream s = generate_stream(cfg.gen);

  const std::string csv_path = prefix + ".csv";
  const std::string truth_path = prefix + ".truth.json";
  std::ofstream csv(csv_path);
  if (!csv) {
    std::cerr << "error: cannot open " << csv_path << " for writing\n";
    return kExitUsage;
  }
  std::ofstream truth(truth_path);
  if (!truth) {
    csv.close();
    std::remove(csv_path.c_str());
    std::cerr << "error: cannot open " << truth_path << " for writing\n";
    return kExitUsage;
  }

  csv << "t";
  for (int i = 1; i <= cfg.gen.d; ++i) csv << ",x" << i;
  csv << "\n";
  for (long t = 0; t < s.x.cols(); ++t) {
    csv << t;
    for (int i = 0; i < cfg.gen.d; ++i) csv << ',' << fmt17(s.x(i, t));
    csv << "\n";
  }

  json out;
  out["seed"] = cfg.gen.seed;
  out["d"] = cfg.gen.d;
  out["config"] = config_echo(cfg);
  out["cluster_b"] = json::array();
  for (const auto& b : s.truth.cluster_b)
    out["cluster_b"].push_back(matrix_rowmajor(b.b));
  out["segments"] = json::array();
  for (const auto& seg : s.truth.segments)
    out["segments"].push_back(
        {{"start", seg.start}, {"end", seg.end}, {"cluster", seg.cluster_id}});
  truth << out.dump(2) << "\n";

  if (!csv.good() || !truth.good()) {
    std::cerr << "error: write failure\n";
    return kExitUsage;
  }
  std::cout << "wrote " << csv_path << " (" << s.x.cols() << " rows) and "
            << truth_path << "\n";
  return 0;
}

// ---------------------------------------------------------------- run

struct CsvData {
  Eigen::MatrixXd x;  // d x T
  std::vector<long> t;
};

std::optional<CsvData> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    return std::nullopt;
  }
  std::string header;
  if (!std::getline(in, header)) {
    std::cerr << "error: empty input " << path << "\n";
    return std::nullopt;
  }
  int d = -1;
  for (char c : header)
    if (c == ',') ++d;
  ++d;
  if (d < 1) {
    std::cerr << "error: no data columns in " << path << "\n";
    return std::nullopt;
  }

  std::vector<Eigen::VectorXd> rows;
  std::vector<long> ticks;
  std::string line;
  long lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    bool ok = std::getline(ss, cell, ',').good();
    long t = 0;
    Eigen::VectorXd v(d);
    try {
      if (ok) t = std::stol(cell);
      for (int i = 0; ok && i < d; ++i) {
        if (!std::getline(ss, cell, ',') && i + 1 < d) ok = false;
        if (ok) v[i] = std::stod(cell);
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok || !v.allFinite()) {
      std::cerr << "warning: skipping malformed row at line " << lineno << "\n";
      continue;
    }
    rows.push_back(std::move(v));
    ticks.push_back(t);
  }
  if (rows.empty()) {
    std::cerr << "error: no usable rows in " << path << "\n";
    return std::nullopt;
  }
  CsvData out;
  out.x.resize(d, static_cast<Eigen::Index>(rows.size()));
  for (size_t j = 0; j < rows.size(); ++j)
    out.x.col(static_cast<Eigen::Index>(j)) = rows[j];
  out.t = std::move(ticks);
  return out;
}

json eigenvalues_json(const Regime& regime) {
  json per_signal = json::array();
  for (const auto& factor : regime.factors) {
    json evs = json::array();
    for (int q = 0; q < factor.k(); ++q)
      evs.push_back({factor.lambda[q].real(), factor.lambda[q].imag()});
    per_signal.push_back(std::move(evs));
  }
  return per_signal;
}

int cmd_run(const RunConfig& cfg, const std::string& in_csv,
            const std::string& prefix, bool baseline_static) {
  const auto data = read_csv(in_csv);
  if (!data) return kExitUsage;
  const int d = static_cast<int>(data->x.rows());
  RunConfig local = cfg;
  local.eng.validate(d);

  std::ofstream steps(prefix + ".steps.jsonl");
  std::ofstream regimes(prefix + ".regimes.jsonl");
  std::ofstream causal(prefix + ".causal.jsonl");
  if (!steps || !regimes || !causal) {
    std::cerr << "error: cannot open outputs under prefix " << prefix << "\n";
    return kExitUsage;
  }

  if (baseline_static) {
    // One demixing matrix estimated from the whole stream, reported at
    // every sampled tick.
    IcaConfig ica_cfg = local.eng.ica;
    ica_cfg.seed = local.eng.seed;
    const IcaResult ica = fixed_point_ica(data->x, ica_cfg);
    const auto id = identify_causality(ica.w, local.eng.edge_threshold);
    regimes << json{{"t", data->t.front()},
                    {"regime", 0},
                    {"w", matrix_rowmajor(ica.w)},
                    {"b", matrix_rowmajor(id.adjacency.b)},
                    {"eigenvalues", json::array()}}
                   .dump()
            << "\n";
    for (size_t j = local.eng.n_window - 1; j < data->t.size();
         j += kEvalStride)
      causal << json{{"t", data->t[j]},
                     {"regime", 0},
                     {"b", matrix_rowmajor(id.adjacency.b)}}
                    .dump()
             << "\n";
    std::cout << "static baseline written under " << prefix << "\n";
    return 0;
  }

  StreamingEngine engine(d, local.eng);
  long since_eval = 0;
  bool warm_done = false;
  int last_regime_count = 0;
  for (size_t j = 0; j < data->t.size(); ++j) {
    StepOutput out;
    try {
      out = engine.process_tick(data->x.col(static_cast<Eigen::Index>(j)));
    } catch (const std::invalid_argument& e) {
      std::cerr << "warning: tick " << data->t[j] << " rejected: " << e.what()
                << "\n";
      continue;
    }
    if (out.warmup) continue;
    if (!warm_done) {
      warm_done = true;
      since_eval = 0;
    }

    json forecast = json::array();
    for (Eigen::Index i = 0; i < out.forecast.size(); ++i)
      forecast.push_back(out.forecast[i]);
    steps << json{{"t", data->t[j]},
                  {"regime", out.regime_id},
                  {"created", out.created_new},
                  {"switched", out.switched},
                  {"fit_error", out.fit_error},
                  {"forecast", std::move(forecast)}}
                 .dump()
          << "\n";
    steps.flush();

    if (engine.regime_count() > last_regime_count) {
      for (int r = last_regime_count; r < engine.regime_count(); ++r) {
        const Regime& regime = engine.regime(r);
        const auto id =
            identify_causality(regime.w, local.eng.edge_threshold);
        regimes << json{{"t", data->t[j]},
                        {"regime", r},
                        {"w", matrix_rowmajor(regime.w)},
                        {"b", matrix_rowmajor(id.adjacency.b)},
                        {"eigenvalues", eigenvalues_json(regime)}}
                       .dump()
                << "\n";
      }
      regimes.flush();
      last_regime_count = engine.regime_count();
    }

    if (since_eval == 0) {
      causal << json{{"t", data->t[j]},
                     {"regime", out.regime_id},
                     {"b", matrix_rowmajor(out.causal.b)}}
                    .dump()
             << "\n";
      causal.flush();
    }
    since_eval = (since_eval + 1) % kEvalStride;
  }
  std::cout << "run complete: " << data->t.size() << " ticks, "
            << engine.regime_count() << " regimes, outputs under " << prefix
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- eval

int cmd_eval(const RunConfig& cfg, const std::string& truth_path,
             const std::string& prefix, const std::string& csv_path) {
  std::ifstream truth_in(truth_path);
  if (!truth_in) {
    std::cerr << "error: cannot open " << truth_path << "\n";
    return kExitUsage;
  }
  json truth = json::parse(truth_in, nullptr, false);
  if (truth.is_discarded()) {
    std::cerr << "error: " << truth_path << " is not valid JSON\n";
    return kExitUsage;
  }
  const int d = truth.at("d").get<int>();
  std::vector<CausalDigraph> cluster_graphs;
  for (const auto& jb : truth.at("cluster_b"))
    cluster_graphs.push_back(binarize(
        CausalAdjacency{matrix_from_rowmajor(jb, d)}, cfg.eng.edge_threshold));
  struct Seg {
    long start, end;
    int cluster;
  };
  std::vector<Seg> segments;
  for (const auto& js : truth.at("segments"))
    segments.push_back({js.at("start").get<long>(), js.at("end").get<long>(),
                        js.at("cluster").get<int>()});
  auto truth_at = [&](long t) -> const CausalDigraph* {
    for (const auto& seg : segments)
      if (t >= seg.start && t < seg.end)
        return &cluster_graphs[static_cast<size_t>(seg.cluster - 1)];
    return nullptr;
  };

  // Graph metrics from the sampled causal trace.
  std::ifstream causal_in(prefix + ".causal.jsonl");
  if (!causal_in) {
    std::cerr << "error: cannot open " << prefix << ".causal.jsonl\n";
    return kExitUsage;
  }
  double shd_acc = 0.0, sid_acc = 0.0;
  long n_eval = 0;
  std::string line;
  while (std::getline(causal_in, line)) {
    if (trim(line).empty()) continue;
    const json j = json::parse(line);
    const long t = j.at("t").get<long>();
    const CausalDigraph* g_true = truth_at(t);
    if (!g_true) {
      std::cerr << "error: causal trace tick " << t
                << " falls outside the ground-truth segments\n";
      return kExitUsage;
    }
    const CausalDigraph est = binarize(
        CausalAdjacency{matrix_from_rowmajor(j.at("b"), d)},
        cfg.eng.edge_threshold);
    shd_acc += shd(*g_true, est);
    sid_acc += sid(*g_true, est);
    ++n_eval;
  }
  if (n_eval == 0) {
    std::cerr << "error: empty causal trace\n";
    return kExitUsage;
  }

  // Forecast metrics against the raw stream.
  const auto data = read_csv(csv_path);
  if (!data) return kExitUsage;
  if (data->x.rows() != d) {
    std::cerr << "error: csv dimensionality " << data->x.rows()
              << " does not match ground truth d=" << d << "\n";
    return kExitUsage;
  }
  std::map<long, Eigen::Index> tick_col;
  for (size_t j = 0; j < data->t.size(); ++j)
    tick_col[data->t[j]] = static_cast<Eigen::Index>(j);

  std::ifstream steps_in(prefix + ".steps.jsonl");
  std::vector<Eigen::VectorXd> pred, actual;
  if (steps_in) {
    while (std::getline(steps_in, line)) {
      if (trim(line).empty()) continue;
      const json j = json::parse(line);
      const long target = j.at("t").get<long>() + cfg.eng.l_s;
      const auto it = tick_col.find(target);
      if (it == tick_col.end()) continue;
      const auto& jf = j.at("forecast");
      if (static_cast<int>(jf.size()) != d) {
        std::cerr << "error: forecast length mismatch at t="
                  << j.at("t").get<long>() << "\n";
        return kExitUsage;
      }
      Eigen::VectorXd v(d);
      for (int i = 0; i < d; ++i) v[i] = jf[i].get<double>();
      pred.push_back(std::move(v));
      actual.push_back(data->x.col(it->second));
    }
  }

  const double shd_mean = shd_acc / static_cast<double>(n_eval);
  const double sid_mean = sid_acc / static_cast<double>(n_eval);
  std::printf("metric        value\n");
  std::printf("-----------   ----------\n");
  std::printf("shd (mean)    %10.4f\n", shd_mean);
  std::printf("sid (mean)    %10.4f\n", sid_mean);
  if (!pred.empty()) {
    std::printf("rmse          %10.4f\n", rmse(pred, actual));
    std::printf("mae           %10.4f\n", mae(pred, actual));
  }
  std::printf("\n");
  std::printf("shd_mean=%.17g\n", shd_mean);
  std::printf("sid_mean=%.17g\n", sid_mean);
  std::printf("eval_ticks=%ld\n", n_eval);
  if (!pred.empty()) {
    std::printf("rmse=%.17g\n", rmse(pred, actual));
    std::printf("mae=%.17g\n", mae(pred, actual));
    std::printf("forecast_pairs=%zu\n", pred.size());
  }
  return 0;
}

// ---------------------------------------------------------------- bench

int cmd_bench(const RunConfig& cfg, long length) {
  if (length < 2000) {
    std::cerr << "error: bench length must be >= 2000\n";
    return kExitUsage;
  }
  GenConfig gen = cfg.gen;
  gen.sequence = {1};
  gen.segment_len = static_cast<int>(length);
  const SynthStream s = generate_stream(gen);

  StreamingEngine engine(gen.d, cfg.eng);
  std::vector<double> times;
  times.reserve(static_cast<size_t>(length));
  for (long t = 0; t < s.x.cols(); ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    (void)engine.process_tick(s.x.col(t));
    const auto t1 = std::chrono::steady_clock::now();
    if (t >= cfg.eng.n_window)
      times.push_back(
          std::chrono::duration<double, std::micro>(t1 - t0).count());
  }

  auto percentile = [](std::vector<double> v, double p) {
    const size_t idx = static_cast<size_t>(p * (v.size() - 1));
    std::nth_element(v.begin(), v.begin() + idx, v.end());
    return v[idx];
  };
  const size_t third = times.size() / 3;
  const char* names[3] = {"early", "middle", "late"};
  for (int k = 0; k < 3; ++k) {
    const auto begin = times.begin() + k * third;
    const auto end = k == 2 ? times.end() : begin + third;
    std::vector<double> slice(begin, end);
    std::printf("third=%s p50=%.2fus p95=%.2fus\n", names[k],
                percentile(slice, 0.5), percentile(slice, 0.95));
  }

  const double n = static_cast<double>(times.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < times.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += times[i];
    sxx += x * x;
    sxy += x * times[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  std::printf("slope_us_per_tick=%.6g\n", slope);
  std::printf("overall_p50=%.2fus ticks=%zu\n", percentile(times, 0.5),
              times.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming regime discovery, causal identification and "
               "forecasting over multivariate data streams"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string config_path, prefix, in_csv, truth_path, csv_path;
  long bench_length = 10000;
  bool baseline_static = false;

  auto* gen_cmd = app.add_subcommand("gen", "synthesize a ground-truthed stream");
  gen_cmd->add_option("--config", config_path, "key = value config file");
  gen_cmd->add_option("--out", prefix, "output path prefix")->required();
  KeyTable gen_keys = add_config_options(gen_cmd, cfg);

  auto* run_cmd = app.add_subcommand("run", "stream a CSV through the engine");
  run_cmd->add_option("--config", config_path, "key = value config file");
  run_cmd->add_option("--in", in_csv, "input CSV")->required();
  run_cmd->add_option("--out", prefix, "output path prefix")->required();
  run_cmd->add_flag("--baseline-static", baseline_static,
                    "single whole-stream estimate instead of streaming");
  KeyTable run_keys = add_config_options(run_cmd, cfg);

  auto* eval_cmd = app.add_subcommand("eval", "score run outputs");
  eval_cmd->add_option("--config", config_path, "key = value config file");
  eval_cmd->add_option("--truth", truth_path, "ground-truth json")->required();
  eval_cmd->add_option("--run", prefix, "run output prefix")->required();
  eval_cmd->add_option("--csv", csv_path, "raw stream CSV")->required();
  KeyTable eval_keys = add_config_options(eval_cmd, cfg);

  auto* bench_cmd = app.add_subcommand("bench", "per-tick latency report");
  bench_cmd->add_option("--config", config_path, "key = value config file");
  bench_cmd->add_option("--length", bench_length, "stream length (>= 2000)");
  KeyTable bench_keys = add_config_options(bench_cmd, cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    const KeyTable* keys = nullptr;
    if (gen_cmd->parsed()) keys = &gen_keys;
    if (run_cmd->parsed()) keys = &run_keys;
    if (eval_cmd->parsed()) keys = &eval_keys;
    if (bench_cmd->parsed()) keys = &bench_keys;
    if (!config_path.empty()) apply_config_file(config_path, cfg, *keys);
    finalize_config(cfg);

    if (gen_cmd->parsed()) return cmd_gen(cfg, prefix);
    if (run_cmd->parsed()) return cmd_run(cfg, in_csv, prefix, baseline_static);
    if (eval_cmd->parsed()) return cmd_eval(cfg, truth_path, prefix, csv_path);
    if (bench_cmd->parsed()) return cmd_bench(cfg, bench_length);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}
