#include "trajbench/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "log.hpp"
#include "trajbench/error.hpp"
#include "trajbench/report.hpp"

namespace trajbench {

namespace fs = std::filesystem;

ExperimentKind parse_experiment_kind(std::string_view name) {
  if (name == "single") return ExperimentKind::kSingle;
  if (name == "horizon_sweep") return ExperimentKind::kHorizonSweep;
  if (name == "observation_sweep") return ExperimentKind::kObservationSweep;
  if (name == "noise_sweep") return ExperimentKind::kNoiseSweep;
  if (name == "transfer") return ExperimentKind::kTransfer;
  if (name == "runtime") return ExperimentKind::kRuntime;
  if (name == "crowd_breakdown") return ExperimentKind::kCrowdBreakdown;
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSingle: return "single";
    case ExperimentKind::kHorizonSweep: return "horizon_sweep";
    case ExperimentKind::kObservationSweep: return "observation_sweep";
    case ExperimentKind::kNoiseSweep: return "noise_sweep";
    case ExperimentKind::kTransfer: return "transfer";
    case ExperimentKind::kRuntime: return "runtime";
    case ExperimentKind::kCrowdBreakdown: return "crowd_breakdown";
  }
  return "single";
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

int seconds_to_frames(double seconds, double hz, std::string_view what) {
  if (!(seconds > 0.0) || !(hz > 0.0)) throw ConfigError(std::string(what) + " must be positive");
  const double frames = seconds * hz;
  const double rounded = std::round(frames);
  if (std::abs(frames - rounded) > 1e-6 * std::max(1.0, frames))
    throw ConfigError(std::string(what) + " of " + format_double(seconds) + " s is not a whole number of frames at " +
                      format_double(hz) + " Hz");
  return static_cast<int>(rounded);
}

namespace {

std::string where(const YAML::Node& n) {
  return n.Mark().line >= 0 ? " (line " + std::to_string(n.Mark().line + 1) + ")" : std::string();
}

void check_keys(const YAML::Node& node, const std::string& section, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError("'" + section + "' must be a mapping" + where(node));
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (!ok.count(key)) throw ConfigError("unknown key '" + key + "' in " + section + where(kv.first));
  }
}

template <typename T>
T get(const YAML::Node& node, const char* key, T fallback, const std::string& section) {
  const auto v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + section + where(v));
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::exists(p)) throw ConfigError(what + " not found: " + p.string());
}

DatasetSource parse_dataset(const YAML::Node& n, const fs::path& base, std::size_t index) {
  const std::string section = "datasets[" + std::to_string(index) + "]";
  check_keys(n, section,
             {"name", "path", "format", "environment", "goals", "calibration_fraction", "synthetic", "agents", "frames",
              "seed"});
  DatasetSource d;
  d.calibration_fraction = get(n, "calibration_fraction", d.calibration_fraction, section);
  if (n["synthetic"]) {
    if (n["path"]) throw ConfigError(section + ": give either 'path' or 'synthetic', not both");
    d.synthetic = get<std::string>(n, "synthetic", "", section);
    static const std::set<std::string> kinds{"linear", "arc", "chasing", "opposing", "crossing"};
    if (!kinds.count(*d.synthetic)) throw ConfigError(section + ": unknown synthetic kind '" + *d.synthetic + "'");
    d.synthetic_agents = get(n, "agents", d.synthetic_agents, section);
    d.synthetic_frames = get(n, "frames", d.synthetic_frames, section);
    d.synthetic_seed = get(n, "seed", d.synthetic_seed, section);
    d.name = get<std::string>(n, "name", *d.synthetic, section);
  } else {
    if (!n["path"]) throw ConfigError(section + ": missing 'path'");
    for (const char* k : {"agents", "frames", "seed"})
      if (n[k]) throw ConfigError(section + ": '" + k + "' only applies to synthetic datasets");
    d.path = resolve(base, get<std::string>(n, "path", "", section));
    require_file(d.path, "dataset");
    d.format = parse_dataset_format(get<std::string>(n, "format", "native", section));
    d.name = get<std::string>(n, "name", d.path.stem().string(), section);
  }
  if (n["environment"]) {
    d.environment = resolve(base, get<std::string>(n, "environment", "", section));
    require_file(*d.environment, "environment map");
  }
  if (n["goals"]) {
    d.goals = resolve(base, get<std::string>(n, "goals", "", section));
    require_file(*d.goals, "goals file");
  }
  return d;
}

PreprocessConfig parse_preprocess(const YAML::Node& n) {
  PreprocessConfig p;
  if (!n) return p;
  check_keys(n, "preprocess",
             {"target_hz", "smoothing_window", "smoothing_edge", "gap_tolerance_factor", "noise_sigma", "noise_seed"});
  p.target_hz = get(n, "target_hz", p.target_hz, "preprocess");
  p.smoothing_window = get(n, "smoothing_window", p.smoothing_window, "preprocess");
  const auto edge = get<std::string>(n, "smoothing_edge", "symmetric", "preprocess");
  if (edge == "symmetric") {
    p.smoothing_edge = SmoothingEdge::kSymmetric;
  } else if (edge == "truncated") {
    p.smoothing_edge = SmoothingEdge::kTruncated;
  } else {
    throw ConfigError("unknown smoothing_edge '" + edge + "'");
  }
  p.gap_tolerance_factor = get(n, "gap_tolerance_factor", p.gap_tolerance_factor, "preprocess");
  p.noise_sigma = get(n, "noise_sigma", p.noise_sigma, "preprocess");
  p.noise_seed = get(n, "noise_seed", p.noise_seed, "preprocess");
  p.validate();
  return p;
}

ScenarioSpec parse_scenario(const YAML::Node& n, double target_hz) {
  ScenarioSpec s;
  if (!n) return s;
  check_keys(n, "scenario",
             {"preset", "observation_frames", "observation_seconds", "prediction_frames", "prediction_seconds",
              "min_agents", "stride"});
  const auto preset = get<std::string>(n, "preset", "default", "scenario");
  if (preset == "eth") {
    s = ScenarioSpec::eth();
  } else if (preset != "default") {
    throw ConfigError("unknown scenario preset '" + preset + "'");
  }
  auto frames = [&](const char* frames_key, const char* seconds_key, int fallback) {
    if (n[frames_key] && n[seconds_key])
      throw ConfigError(std::string("give either '") + frames_key + "' or '" + seconds_key + "'");
    if (n[seconds_key]) {
      if (!(target_hz > 0.0))
        throw ConfigError(std::string("'") + seconds_key + "' needs preprocess.target_hz to convert to frames");
      return seconds_to_frames(get(n, seconds_key, 0.0, "scenario"), target_hz, seconds_key);
    }
    return get(n, frames_key, fallback, "scenario");
  };
  s.observation_frames = frames("observation_frames", "observation_seconds", s.observation_frames);
  s.prediction_frames = frames("prediction_frames", "prediction_seconds", s.prediction_frames);
  s.min_agents = get(n, "min_agents", s.min_agents, "scenario");
  s.stride = get(n, "stride", s.stride, "scenario");
  try {
    s.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("scenario: ") + e.what());
  }
  return s;
}

PredictorConfig parse_predictor(const YAML::Node& n, const fs::path& base) {
  PredictorConfig p;
  if (!n) return p;
  check_keys(n, "predictor",
             {"kind", "command", "velocity", "filter_sigma", "params", "params_file", "timeout_s", "handshake_timeout_s"});
  p.kind = get<std::string>(n, "kind", p.kind, "predictor");
  if (p.kind != "cvm" && p.kind != "sof" && p.kind != "kara" && p.kind != "external")
    throw ConfigError("unknown predictor kind '" + p.kind + "'");
  p.command = get<std::string>(n, "command", "", "predictor");
  if (p.kind == "external" && p.command.empty()) throw ConfigError("external predictor needs a 'command'");
  if (p.kind != "external" && !p.command.empty()) throw ConfigError("'command' only applies to external predictors");
  const auto velocity = get<std::string>(n, "velocity", "gaussian", "predictor");
  if (velocity == "gaussian") {
    p.filter.mode = VelocityMode::kGaussian;
  } else if (velocity == "last") {
    p.filter.mode = VelocityMode::kLastDifference;
  } else {
    throw ConfigError("unknown velocity estimator '" + velocity + "'");
  }
  p.filter.sigma = get(n, "filter_sigma", p.filter.sigma, "predictor");
  if (!(p.filter.sigma > 0.0)) throw ConfigError("filter_sigma must be > 0");
  if (const auto params = n["params"]) {
    if (!params.IsMap()) throw ConfigError("predictor.params must be a mapping" + where(params));
    for (const auto& kv : params) p.params[kv.first.as<std::string>()] = get(params, kv.first.as<std::string>().c_str(), 0.0, "predictor.params");
  }
  if (n["params_file"]) {
    p.params_file = resolve(base, get<std::string>(n, "params_file", "", "predictor"));
    require_file(*p.params_file, "params file");
  }
  p.timeout_s = get(n, "timeout_s", p.timeout_s, "predictor");
  p.handshake_timeout_s = get(n, "handshake_timeout_s", p.handshake_timeout_s, "predictor");
  if (!(p.timeout_s > 0.0) || !(p.handshake_timeout_s > 0.0)) throw ConfigError("timeouts must be > 0");
  return p;
}

CalibrationConfig parse_calibration(const YAML::Node& n) {
  CalibrationConfig c;
  if (!n) return c;
  check_keys(n, "calibration", {"enabled", "budget", "seed", "objective_horizon_s", "refine"});
  c.enabled = get(n, "enabled", true, "calibration");
  c.budget = get(n, "budget", c.budget, "calibration");
  c.seed = get(n, "seed", c.seed, "calibration");
  c.objective_horizon_s = get(n, "objective_horizon_s", c.objective_horizon_s, "calibration");
  c.refine = get(n, "refine", c.refine, "calibration");
  if (c.budget < 1) throw ConfigError("calibration budget must be >= 1");
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (version != kConfigSchemaVersion)
    throw ConfigError("unsupported config version " + std::to_string(version) + " (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  if (datasets.empty()) throw ConfigError("no datasets configured");
  const bool sweep = kind == ExperimentKind::kHorizonSweep || kind == ExperimentKind::kObservationSweep ||
                     kind == ExperimentKind::kNoiseSweep;
  if (sweep && values.empty()) throw ConfigError(std::string(to_string(kind)) + " needs non-empty sweep values");
  if (!sweep && !values.empty()) throw ConfigError(std::string(to_string(kind)) + " takes no sweep values");
  if (kind == ExperimentKind::kNoiseSweep)
    for (double v : values)
      if (!(v >= 0.0)) throw ConfigError("noise sweep values must be >= 0");
  if (kind == ExperimentKind::kTransfer) {
    if (datasets.size() < 2) throw ConfigError("transfer needs at least 2 datasets");
    if (predictor.kind != "sof" && predictor.kind != "kara")
      throw ConfigError("transfer calibrates hyperparameters and needs predictor kind sof or kara");
  }
  if (calibration.enabled && predictor.kind != "sof" && predictor.kind != "kara")
    throw ConfigError("calibration needs predictor kind sof or kara");
  for (const auto& d : datasets)
    if (!(d.calibration_fraction > 0.0 && d.calibration_fraction < 1.0))
      throw ConfigError("calibration_fraction of '" + d.name + "' must lie in (0, 1)");
}

ExperimentConfig parse_config(const std::string& yaml_text, const fs::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError("config must be a YAML mapping");
  check_keys(root, "config",
             {"version", "name", "datasets", "preprocess", "scenario", "predictor", "calibration", "experiment", "seed",
              "output"});
  ExperimentConfig c;
  c.config_hash = fnv1a64(yaml_text);
  if (!root["version"]) throw ConfigError("missing 'version'");
  c.version = get(root, "version", 0, "config");
  if (c.version != kConfigSchemaVersion)
    throw ConfigError("unsupported config version " + std::to_string(c.version) + " (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  c.name = get<std::string>(root, "name", c.name, "config");
  c.seed = get(root, "seed", c.seed, "config");
  c.output_dir = resolve(base_dir, get<std::string>(root, "output", "out", "config"));

  const auto datasets = root["datasets"];
  if (!datasets || !datasets.IsSequence()) throw ConfigError("'datasets' must be a list");
  for (std::size_t i = 0; i < datasets.size(); ++i) c.datasets.push_back(parse_dataset(datasets[i], base_dir, i));
  std::set<std::string> names;
  for (const auto& d : c.datasets)
    if (!names.insert(d.name).second) throw ConfigError("duplicate dataset name '" + d.name + "'");

  c.preprocess = parse_preprocess(root["preprocess"]);
  c.scenario = parse_scenario(root["scenario"], c.preprocess.target_hz);
  c.predictor = parse_predictor(root["predictor"], base_dir);
  c.calibration = parse_calibration(root["calibration"]);

  if (const auto e = root["experiment"]) {
    check_keys(e, "experiment", {"kind", "values"});
    c.kind = parse_experiment_kind(get<std::string>(e, "kind", "single", "experiment"));
    c.values = get(e, "values", std::vector<double>{}, "experiment");
  }
  c.validate();
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

ParamSet load_params_file(const fs::path& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path.string());
  } catch (const YAML::BadFile&) {
    throw IoError("cannot open params file " + path.string());
  } catch (const YAML::Exception& e) {
    throw ConfigError("invalid params file " + path.string() + ": " + e.what());
  }
  ParamSet out;
  if (!root) return out;
  if (!root.IsMap()) throw ConfigError("params file must be a mapping of name: value");
  for (const auto& kv : root) {
    const auto key = kv.first.as<std::string>();
    try {
      out[key] = kv.second.as<double>();
    } catch (const YAML::Exception&) {
      throw ConfigError("params file: '" + key + "' is not a number");
    }
  }
  return out;
}

void write_params_file(const ParamSet& params, const fs::path& path) {
  std::ostringstream out;
  for (const auto& [k, v] : params) out << k << ": " << format_double(v) << "\n";
  write_text_file(path, out.str());
}

}  // namespace trajbench
