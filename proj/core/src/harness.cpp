#include "trajbench/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "trajbench/dataset_io.hpp"
#include "trajbench/extern_bridge.hpp"
#include "trajbench/metrics.hpp"
#include "trajbench/synthetic.hpp"

#ifndef TRAJBENCH_VERSION
#define TRAJBENCH_VERSION "0.0.0"
#endif

namespace trajbench {

std::string version() { return TRAJBENCH_VERSION; }

namespace {

template <typename F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string params_text(const ParamSet& params) {
  std::string out;
  for (const auto& [k, v] : params) out += k + "=" + format_double(v) + ";";
  return out;
}

Dataset synthesize(const DatasetSource& source) {
  const auto& kind = *source.synthetic;
  Dataset d;
  if (kind == "linear") {
    LinearCrowdOptions o;
    o.agents = source.synthetic_agents;
    o.frames = source.synthetic_frames;
    o.seed = source.synthetic_seed;
    d = linear_crowd_dataset(o);
  } else if (kind == "arc") {
    d = circular_arc_dataset(source.synthetic_agents, source.synthetic_frames, 5.0, 1.0, 2.5);
  } else {
    d = synthetic_crowd(parse_synthetic_kind(kind), source.synthetic_agents, 10.0, 1);
  }
  d.name = source.name;
  return d;
}

struct Prepared {
  std::string name;
  Dataset data;
  double calibration_fraction = 0.3;
};

std::vector<Prepared> prepare_all(const ExperimentConfig& config) {
  std::vector<Prepared> out;
  for (const auto& s : config.datasets)
    out.push_back({s.name, prepare_dataset(s, config.preprocess), s.calibration_fraction});
  return out;
}

std::vector<Scenario> extract(const Dataset& dataset, const ScenarioSpec& spec) {
  return stage("extract", [&] {
    auto scenarios = extract_scenarios(dataset, spec);
    if (scenarios.empty())
      throw Error("no scenarios in dataset '" + dataset.name + "' for O_p=" + std::to_string(spec.observation_frames) +
                  ", T_p=" + std::to_string(spec.prediction_frames) + ", min_agents=" +
                  std::to_string(spec.min_agents));
    return scenarios;
  });
}

CalibrationResult calibrate_on(const ExperimentConfig& config, const Dataset& calib) {
  return stage("calibrate", [&] {
    CalibrationOptions o;
    o.budget = config.calibration.budget;
    o.seed = config.calibration.seed;
    o.objective_horizon_s = config.calibration.objective_horizon_s;
    o.refine = config.calibration.refine;
    auto space = ParamSpace::for_predictor(config.predictor.kind);
    return calibrate(config.predictor.kind, space, calib, config.scenario, o, config.predictor.filter);
  });
}

/// The evaluation data of one dataset plus the predictor to run on it. With
/// calibration enabled the predictor uses parameters fitted on the calibration
/// split and is evaluated on the holdout split.
struct Target {
  std::string name;
  Dataset data;
  std::unique_ptr<Predictor> predictor;
};

std::vector<Target> targets(const ExperimentConfig& config, RunOutput& out) {
  std::vector<Target> result;
  std::unique_ptr<Predictor> shared;
  for (auto& p : prepare_all(config)) {
    if (config.calibration.enabled) {
      auto [calib, holdout] = stage("split", [&] { return split_calibration(p.data, p.calibration_fraction); });
      auto cal = calibrate_on(config, calib);
      auto predictor = stage("predictor", [&] { return make_predictor(config.predictor, cal.best_params); });
      out.calibrations.push_back({p.name, std::move(cal)});
      result.push_back({p.name, std::move(holdout), std::move(predictor)});
    } else {
      if (!shared) shared = stage("predictor", [&] { return make_predictor(config.predictor); });
      result.push_back({p.name, std::move(p.data), nullptr});
    }
  }
  // One predictor instance (and one external process) serves every dataset.
  if (shared) result.front().predictor = std::move(shared);
  return result;
}

Predictor& predictor_of(std::vector<Target>& ts, std::size_t i) {
  if (ts[i].predictor) return *ts[i].predictor;
  return *ts.front().predictor;
}

void add_metadata(MetricReport& report, const ExperimentConfig& config, const std::vector<Target>& ts,
                  std::size_t scenario_count) {
  auto& m = report.metadata;
  const double hz = ts.empty() ? 0.0 : ts.front().data.frequency_hz;
  m["config_name"] = config.name;
  m["config_hash"] = hex(config.config_hash);
  m["seed"] = std::to_string(config.seed);
  m["experiment"] = std::string(to_string(config.kind));
  m["stride"] = std::to_string(config.scenario.stride);
  m["min_agents"] = std::to_string(config.scenario.min_agents);
  m["O_p"] = std::to_string(config.scenario.observation_frames);
  m["T_p"] = std::to_string(config.scenario.prediction_frames);
  if (hz > 0.0) {
    m["frequency_hz"] = format_double(hz);
    m["O_s"] = format_double(config.scenario.observation_frames / hz);
    m["T_s"] = format_double(config.scenario.prediction_frames / hz);
  }
  m["target_hz"] = format_double(config.preprocess.target_hz);
  m["smoothing_window"] = std::to_string(config.preprocess.smoothing_window);
  m["smoothing_edge"] = config.preprocess.smoothing_edge == SmoothingEdge::kSymmetric ? "symmetric" : "truncated";
  m["gap_tolerance_factor"] = format_double(config.preprocess.gap_tolerance_factor);
  m["preprocess_noise_sigma"] = format_double(config.preprocess.noise_sigma);
  m["preprocess_noise_seed"] = std::to_string(config.preprocess.noise_seed);
  m["velocity_filter"] = config.predictor.filter.mode == VelocityMode::kGaussian ? "gaussian" : "last";
  m["filter_sigma"] = format_double(config.predictor.filter.sigma);
  m["calibration"] = config.calibration.enabled ? "enabled" : "disabled";
  if (config.calibration.enabled) {
    m["calibration_budget"] = std::to_string(config.calibration.budget);
    m["calibration_seed"] = std::to_string(config.calibration.seed);
    m["calibration_objective_horizon_s"] = format_double(config.calibration.objective_horizon_s);
  }
  std::string names;
  for (const auto& t : ts) names += (names.empty() ? "" : ";") + t.name;
  m["datasets"] = names;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Predictor& p = ts[i].predictor ? *ts[i].predictor : *ts[0].predictor;
    const std::string prefix = ts.size() == 1 ? "" : ts[i].name + ".";
    m[prefix + "predictor"] = p.id();
    m[prefix + "params"] = params_text(p.params());
    m[prefix + "params_hash"] = hex(fnv1a64(params_text(p.params())));
  }
  m["scenarios"] = std::to_string(scenario_count);
  m["std"] = "population";
  m["aggregation"] = "agent mean per scenario, then mean/std over scenarios";
  m["version"] = version();
}

void add_cells(MetricReport& report, const Evaluation& e, const std::string& sweep, const std::string& group) {
  report.append(report_evaluation(e, sweep, group));
}

}  // namespace

Dataset prepare_dataset(const DatasetSource& source, const PreprocessConfig& config) {
  Dataset raw = stage("load", [&] {
    Dataset d = source.synthetic ? synthesize(source) : load_dataset(source.path, source.format);
    if (source.synthetic) d.name = source.name;
    if (source.environment || source.goals) {
      EnvironmentModel env = d.environment ? *d.environment : EnvironmentModel{};
      if (source.environment) {
        auto loaded = load_environment(*source.environment);
        if (loaded.goals.empty()) loaded.goals = env.goals;
        env = std::move(loaded);
      }
      if (source.goals) env.goals = load_goals(*source.goals);
      d.environment = std::make_shared<const EnvironmentModel>(std::move(env));
    }
    d.validate();
    return d;
  });
  return stage("preprocess", [&] { return preprocess(raw, config); });
}

std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config, const ParamSet& params) {
  using ms = std::chrono::milliseconds;
  if (config.kind == "external") {
    if (!params.empty() || !config.params.empty()) throw ConfigError("external predictors take no params");
    return std::make_unique<ExternalPredictor>(config.command, ms(static_cast<long long>(config.timeout_s * 1000.0)),
                                               ms(static_cast<long long>(config.handshake_timeout_s * 1000.0)));
  }
  ParamSet merged = config.params;
  if (config.params_file)
    for (const auto& [k, v] : load_params_file(*config.params_file)) merged[k] = v;
  for (const auto& [k, v] : params) merged[k] = v;
  return make_builtin_predictor(config.kind, merged, config.filter);
}

Evaluation evaluate(Predictor& predictor, const std::vector<Scenario>& scenarios) {
  Evaluation e;
  e.scores.reserve(scenarios.size());
  for (const auto& s : scenarios) {
    const auto prediction = stage("predict", [&] { return predictor.predict(s); });
    e.scores.push_back(stage("score", [&] { return summarize(s, score_scenario(s, prediction)); }));
  }
  return e;
}

std::vector<Scenario> perturb_observations(const std::vector<Scenario>& scenarios, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
  std::vector<Scenario> out = scenarios;
  if (sigma == 0.0) return out;
  for (auto& s : out) {
    for (auto& a : s.agents) {
      const auto n = static_cast<Frame>(a.observed.size());
      for (Frame k = 0; k < n; ++k) {
        const Frame frame = s.anchor - (n - 1 - k);
        a.observed[static_cast<std::size_t>(k)] += sigma * noise_draw(seed, a.agent_id, frame);
      }
    }
  }
  return out;
}

MetricReport report_evaluation(const Evaluation& evaluation, const std::string& sweep, const std::string& group) {
  std::vector<GroupedValue> ade;
  std::vector<GroupedValue> fde;
  std::vector<GroupedValue> nlp;
  for (const auto& s : evaluation.scores) {
    ade.push_back({group, s.ade});
    fde.push_back({group, s.fde});
    if (s.nlp) nlp.push_back({group, *s.nlp});
  }
  MetricReport r;
  r.cells = aggregate("ade", sweep, ade);
  for (auto& c : aggregate("fde", sweep, fde)) r.cells.push_back(std::move(c));
  for (auto& c : aggregate("nlp", sweep, nlp)) r.cells.push_back(std::move(c));
  return r;
}

std::vector<RuntimeRow> profile_runtime(Predictor& predictor, const std::vector<Scenario>& scenarios,
                                        int warmup_calls) {
  std::map<std::size_t, std::vector<const Scenario*>> bins;
  for (const auto& s : scenarios) bins[s.agents.size()].push_back(&s);
  std::vector<RuntimeRow> rows;
  for (const auto& [agents, list] : bins) {
    for (int w = 0; w < warmup_calls; ++w) (void)predictor.predict(*list.front());
    std::vector<double> times;
    times.reserve(list.size());
    for (const auto* s : list) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto prediction = predictor.predict(*s);
      const auto t1 = std::chrono::steady_clock::now();
      (void)prediction;
      times.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    RuntimeRow row;
    row.agents = agents;
    row.calls = times.size();
    double sum = 0.0;
    for (double t : times) sum += t;
    row.mean_ms = sum / static_cast<double>(times.size());
    row.max_ms = *std::max_element(times.begin(), times.end());
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    row.median_ms = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    rows.push_back(row);
  }
  return rows;
}

std::string runtime_csv(const std::vector<RuntimeRow>& rows) {
  std::ostringstream out;
  out << "agents,calls,mean_ms,median_ms,max_ms\n";
  for (const auto& r : rows)
    out << r.agents << "," << r.calls << "," << format_double(r.mean_ms) << "," << format_double(r.median_ms) << ","
        << format_double(r.max_ms) << "\n";
  return out.str();
}

std::string calibration_trace_csv(const std::vector<NamedCalibration>& calibrations) {
  std::string out;
  for (const auto& c : calibrations) {
    std::istringstream lines(c.result.trace_csv());
    std::string line;
    bool header = true;
    while (std::getline(lines, line)) {
      if (header) {
        if (out.empty()) out += "dataset," + line + "\n";
        header = false;
        continue;
      }
      out += c.dataset + "," + line + "\n";
    }
  }
  return out;
}

RunOutput run_single(const ExperimentConfig& config) {
  RunOutput out;
  auto ts = targets(config, out);
  std::size_t count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto scenarios = extract(ts[i].data, config.scenario);
    count += scenarios.size();
    add_cells(out.report, evaluate(predictor_of(ts, i), scenarios), "dataset", ts[i].name);
  }
  add_metadata(out.report, config, ts, count);
  return out;
}

RunOutput run_horizon_sweep(const ExperimentConfig& config, const std::vector<double>& horizons_s) {
  if (horizons_s.empty()) throw ConfigError("horizon sweep needs values");
  RunOutput out;
  auto ts = targets(config, out);
  std::size_t count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double hz = ts[i].data.frequency_hz;
    std::vector<int> frames;
    for (double h : horizons_s) frames.push_back(stage("config", [&] { return seconds_to_frames(h, hz, "horizon"); }));
    ScenarioSpec spec = config.scenario;
    spec.prediction_frames = *std::max_element(frames.begin(), frames.end());
    const auto scenarios = extract(ts[i].data, spec);
    count += scenarios.size();
    for (std::size_t h = 0; h < frames.size(); ++h) {
      std::vector<Scenario> cut;
      cut.reserve(scenarios.size());
      for (const auto& s : scenarios) cut.push_back(truncate_scenario(s, spec.observation_frames, frames[h]));
      const std::string group = ts.size() == 1 ? format_double(horizons_s[h]) : ts[i].name + "@" + format_double(horizons_s[h]);
      add_cells(out.report, evaluate(predictor_of(ts, i), cut), "T_s", group);
    }
  }
  add_metadata(out.report, config, ts, count);
  std::string v;
  for (double h : horizons_s) v += (v.empty() ? "" : ";") + format_double(h);
  out.report.metadata["sweep_values"] = v;
  return out;
}

RunOutput run_observation_sweep(const ExperimentConfig& config, const std::vector<double>& observation_s) {
  if (observation_s.empty()) throw ConfigError("observation sweep needs values");
  RunOutput out;
  auto ts = targets(config, out);
  std::size_t count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double hz = ts[i].data.frequency_hz;
    std::vector<int> frames;
    for (double o : observation_s) {
      const int f = stage("config", [&] { return seconds_to_frames(o, hz, "observation length"); });
      if (f < 2) throw StageError("config", "observation length " + format_double(o) + " s is below 2 frames");
      frames.push_back(f);
    }
    ScenarioSpec spec = config.scenario;
    spec.observation_frames = *std::max_element(frames.begin(), frames.end());
    const auto scenarios = extract(ts[i].data, spec);
    count += scenarios.size();
    for (std::size_t o = 0; o < frames.size(); ++o) {
      std::vector<Scenario> cut;
      cut.reserve(scenarios.size());
      for (const auto& s : scenarios) cut.push_back(truncate_scenario(s, frames[o], spec.prediction_frames));
      const std::string group =
          ts.size() == 1 ? format_double(observation_s[o]) : ts[i].name + "@" + format_double(observation_s[o]);
      add_cells(out.report, evaluate(predictor_of(ts, i), cut), "O_s", group);
    }
  }
  add_metadata(out.report, config, ts, count);
  std::string v;
  for (double o : observation_s) v += (v.empty() ? "" : ";") + format_double(o);
  out.report.metadata["sweep_values"] = v;
  return out;
}

RunOutput run_noise_sweep(const ExperimentConfig& config, const std::vector<double>& sigmas) {
  if (sigmas.empty()) throw ConfigError("noise sweep needs values");
  for (double s : sigmas)
    if (!(s >= 0.0)) throw StageError("config", "negative noise sigma " + format_double(s));
  RunOutput out;
  auto ts = targets(config, out);
  std::size_t count = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto scenarios = extract(ts[i].data, config.scenario);
    count += scenarios.size();
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
      const auto noisy = perturb_observations(scenarios, sigmas[k], mix_seed(config.seed, k));
      const std::string group = ts.size() == 1 ? format_double(sigmas[k]) : ts[i].name + "@" + format_double(sigmas[k]);
      add_cells(out.report, evaluate(predictor_of(ts, i), noisy), "sigma", group);
    }
  }
  add_metadata(out.report, config, ts, count);
  std::string v;
  for (double s : sigmas) v += (v.empty() ? "" : ";") + format_double(s);
  out.report.metadata["sweep_values"] = v;
  if (std::any_of(sigmas.begin(), sigmas.end(), [](double s) { return s >= 0.2; })) {
    const std::string note = "observations become unreliable for sigma >= 0.2 m; expect sharp degradation in those rows";
    out.report.metadata["noise_note"] = note;
    out.notes.push_back(note);
  }
  return out;
}

RunOutput run_transfer(const ExperimentConfig& config) {
  if (config.datasets.size() < 2) throw StageError("config", "transfer needs at least 2 datasets");
  RunOutput out;
  auto prepared = prepare_all(config);
  std::vector<Dataset> tests;
  std::vector<ParamSet> params;
  for (auto& p : prepared) {
    auto [calib, test] = stage("split", [&] { return split_calibration(p.data, p.calibration_fraction); });
    auto cal = calibrate_on(config, calib);
    params.push_back(cal.best_params);
    out.calibrations.push_back({p.name, std::move(cal)});
    tests.push_back(std::move(test));
  }
  std::vector<std::vector<Scenario>> scenarios;
  std::size_t count = 0;
  for (const auto& t : tests) {
    scenarios.push_back(extract(t, config.scenario));
    count += scenarios.back().size();
  }
  std::vector<Target> ts;
  for (std::size_t c = 0; c < prepared.size(); ++c) {
    auto predictor = stage("predictor", [&] { return make_predictor(config.predictor, params[c]); });
    for (std::size_t t = 0; t < prepared.size(); ++t)
      add_cells(out.report, evaluate(*predictor, scenarios[t]), "calibration|test",
                prepared[c].name + "|" + prepared[t].name);
    ts.push_back({prepared[c].name, std::move(tests[c]), std::move(predictor)});
  }
  add_metadata(out.report, config, ts, count);
  return out;
}

RunOutput run_runtime_profile(const ExperimentConfig& config) {
  RunOutput out;
  auto ts = targets(config, out);
  std::vector<Scenario> all;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    auto scenarios = extract(ts[i].data, config.scenario);
    add_cells(out.report, evaluate(predictor_of(ts, i), scenarios), "dataset", ts[i].name);
    for (auto& s : scenarios) all.push_back(std::move(s));
  }
  out.runtime = stage("profile", [&] { return profile_runtime(predictor_of(ts, 0), all); });
  add_metadata(out.report, config, ts, all.size());
  out.report.metadata["runtime_warmup_calls"] = "3";
  out.report.metadata["runtime_clock"] = "steady_clock";
  return out;
}

RunOutput run_crowd_breakdown(const ExperimentConfig& config) {
  RunOutput out;
  auto ts = targets(config, out);
  std::size_t count = 0;
  std::vector<std::pair<std::size_t, ScenarioScore>> scored;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto scenarios = extract(ts[i].data, config.scenario);
    count += scenarios.size();
    const auto e = evaluate(predictor_of(ts, i), scenarios);
    for (const auto& s : e.scores) scored.emplace_back(s.agents, s);
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<GroupedValue> ade;
  std::vector<GroupedValue> fde;
  std::vector<GroupedValue> nlp;
  for (const auto& [agents, s] : scored) {
    const auto g = std::to_string(agents);
    ade.push_back({g, s.ade});
    fde.push_back({g, s.fde});
    if (s.nlp) nlp.push_back({g, *s.nlp});
  }
  out.report.cells = aggregate("ade", "crowd", ade);
  for (auto& c : aggregate("fde", "crowd", fde)) out.report.cells.push_back(std::move(c));
  for (auto& c : aggregate("nlp", "crowd", nlp)) out.report.cells.push_back(std::move(c));
  add_metadata(out.report, config, ts, count);
  return out;
}

RunOutput run_calibration(const ExperimentConfig& config) {
  if (config.predictor.kind != "sof" && config.predictor.kind != "kara")
    throw StageError("config", "calibration needs predictor kind sof or kara");
  RunOutput out;
  std::vector<Target> ts;
  for (auto& p : prepare_all(config)) {
    auto [calib, holdout] = stage("split", [&] { return split_calibration(p.data, p.calibration_fraction); });
    auto cal = calibrate_on(config, calib);
    auto predictor = stage("predictor", [&] { return make_predictor(config.predictor, cal.best_params); });
    MetricCell cell{"calibration_objective", "dataset", p.name, cal.best_value, 0.0, cal.trace.size()};
    out.report.cells.push_back(cell);
    out.calibrations.push_back({p.name, std::move(cal)});
    ts.push_back({p.name, std::move(holdout), std::move(predictor)});
  }
  ExperimentConfig meta = config;
  meta.calibration.enabled = true;
  add_metadata(out.report, meta, ts, 0);
  out.report.metadata.erase("scenarios");
  return out;
}

RunOutput run_experiment(const ExperimentConfig& config) {
  switch (config.kind) {
    case ExperimentKind::kSingle: return run_single(config);
    case ExperimentKind::kHorizonSweep: return run_horizon_sweep(config, config.values);
    case ExperimentKind::kObservationSweep: return run_observation_sweep(config, config.values);
    case ExperimentKind::kNoiseSweep: return run_noise_sweep(config, config.values);
    case ExperimentKind::kTransfer: return run_transfer(config);
    case ExperimentKind::kRuntime: return run_runtime_profile(config);
    case ExperimentKind::kCrowdBreakdown: return run_crowd_breakdown(config);
  }
  throw ConfigError("unknown experiment kind");
}

void write_outputs(const RunOutput& output, const std::filesystem::path& directory) {
  stage("write", [&] {
    write_text_file(directory / "report.csv", output.report.to_csv());
    write_text_file(directory / "report.meta", output.report.to_json());
    if (!output.calibrations.empty()) {
      write_text_file(directory / "calibration.trace", calibration_trace_csv(output.calibrations));
      for (const auto& c : output.calibrations)
        write_params_file(c.result.best_params, directory / ("calibrated_" + c.dataset + ".yaml"));
    }
    if (!output.runtime.empty()) write_text_file(directory / "runtime.csv", runtime_csv(output.runtime));
  });
}

}  // namespace trajbench
