// trajbench command line: run experiments, calibrate, generate fixtures,
// inspect datasets, and smoke-test external predictors.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iostream>

#include "trajbench/dataset_io.hpp"
#include "trajbench/extern_bridge.hpp"
#include "trajbench/harness.hpp"
#include "trajbench/preprocessing.hpp"
#include "trajbench/synthetic.hpp"

namespace fs = std::filesystem;
using namespace trajbench;

namespace {

DatasetFormat guess_format(const fs::path& path, const std::string& explicit_format) {
  if (!explicit_format.empty()) return parse_dataset_format(explicit_format);
  const auto ext = path.extension().string();
  if (ext == ".ndjson" || ext == ".json" || ext == ".jsonl") return DatasetFormat::kTrajnetJson;
  return DatasetFormat::kNative;
}

void apply_predictor_override(ExperimentConfig& config, const std::string& spec) {
  auto& p = config.predictor;
  if (spec.rfind("external:", 0) == 0) {
    p.kind = "external";
    p.command = spec.substr(9);
    p.params.clear();
    p.params_file.reset();
    if (p.command.empty()) throw ConfigError("--predictor external: needs a command");
  } else if (spec == "cvm" || spec == "cvm-last") {
    p.kind = "cvm";
    p.filter.mode = spec == "cvm" ? VelocityMode::kGaussian : VelocityMode::kLastDifference;
    p.params.clear();
    p.params_file.reset();
  } else if (spec == "sof" || spec == "kara") {
    if (p.kind != spec) {
      p.params.clear();
      p.params_file.reset();
    }
    p.kind = spec;
  } else {
    throw ConfigError("unknown --predictor '" + spec + "' (cvm, cvm-last, sof, kara, external:<command>)");
  }
  if (config.calibration.enabled && p.kind != "sof" && p.kind != "kara") config.calibration.enabled = false;
  config.validate();
}

void print_report(const MetricReport& report) { std::cout << report.to_csv(); }

int cmd_run(const std::string& config_path, const std::string& output, const std::string& predictor) {
  auto config = load_config(config_path);
  if (!predictor.empty()) apply_predictor_override(config, predictor);
  auto result = run_experiment(config);
  if (!predictor.empty()) result.report.metadata["predictor_override"] = predictor;
  const fs::path out = output.empty() ? config.output_dir : fs::path(output);
  write_outputs(result, out);
  print_report(result.report);
  for (const auto& n : result.notes) std::cerr << "note: " << n << "\n";
  if (!result.runtime.empty()) std::cout << "\n" << runtime_csv(result.runtime);
  std::cerr << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_calibrate(const std::string& config_path, const std::string& output, std::optional<std::size_t> budget,
                  std::optional<std::uint64_t> seed) {
  auto config = load_config(config_path);
  if (budget) config.calibration.budget = *budget;
  if (seed) config.calibration.seed = *seed;
  const auto result = run_calibration(config);
  const fs::path out = output.empty() ? config.output_dir : fs::path(output);
  write_outputs(result, out);
  for (const auto& c : result.calibrations) {
    std::cout << c.dataset << ": best objective " << format_double(c.result.best_value) << " after "
              << c.result.trace.size() << " trials\n";
    for (const auto& [k, v] : c.result.best_params) std::cout << "  " << k << ": " << format_double(v) << "\n";
  }
  std::cerr << "wrote " << out.string() << "\n";
  return 0;
}

int cmd_synthetic(const std::string& kind, const std::string& output, const std::string& format, int copies,
                  int agents, int frames, std::uint64_t seed, double hz) {
  Dataset d;
  if (kind == "linear") {
    LinearCrowdOptions o;
    o.agents = agents;
    o.frames = frames;
    o.seed = seed;
    o.hz = hz;
    d = linear_crowd_dataset(o);
  } else if (kind == "arc") {
    d = circular_arc_dataset(agents, frames, 5.0, 1.0, hz);
  } else {
    SyntheticOptions o;
    o.hz = hz;
    d = synthetic_crowd(parse_synthetic_kind(kind), copies, 10.0, 1, o);
  }
  const auto fmt = guess_format(output, format);
  write_dataset(d, output, fmt);
  std::cerr << "wrote " << d.tracks.size() << " tracks, " << d.detection_count() << " detections to " << output
            << "\n";
  return 0;
}

int cmd_inspect(const std::string& path, const std::string& format, int observation_frames, int prediction_frames) {
  const auto d = load_dataset(path, guess_format(path, format));
  const auto [t0, t1] = d.time_span();
  std::size_t gaps = 0;
  for (const auto& t : d.tracks) gaps += detect_gaps(t, d.dt(), 1.5).size();
  std::cout << "name: " << d.name << "\n"
            << "frequency_hz: " << format_double(d.frequency_hz) << "\n"
            << "agents: " << d.tracks.size() << "\n"
            << "detections: " << d.detection_count() << "\n"
            << "time_span_s: " << format_double(t0) << " .. " << format_double(t1) << "\n"
            << "gaps: " << gaps << "\n";
  if (d.environment) {
    const auto& env = *d.environment;
    if (env.grid)
      std::cout << "grid: " << env.grid->width << "x" << env.grid->height << " @ " << format_double(env.resolution)
                << " m\n";
    std::cout << "goals: " << env.goals.size() << "\n";
  }
  ScenarioSpec spec;
  spec.observation_frames = observation_frames;
  spec.prediction_frames = prediction_frames;
  const auto scenarios = extract_scenarios(d, spec);
  std::cout << "scenarios(O_p=" << observation_frames << ",T_p=" << prediction_frames << "): " << scenarios.size()
            << "\n";
  for (const auto& [agents, count] : scenario_count_by_crowd(scenarios))
    std::cout << "  crowd " << agents << ": " << count << "\n";
  return 0;
}

int cmd_protocol_check(const std::string& command, double timeout_s, int count) {
  const auto timeout = std::chrono::milliseconds(static_cast<long long>(timeout_s * 1000.0));
  auto session = ExternalSession::spawn(command, timeout);
  session->set_request_timeout(timeout);
  const auto& caps = session->capabilities();
  std::cout << "handshake: ok (version " << caps.version << ", name '" << caps.name << "', max_k " << caps.max_k
            << ")\nrepresentations:";
  for (const auto& r : caps.representations) std::cout << " " << r;
  std::cout << "\n";

  std::vector<Scenario> scenarios{generate_synthetic(SyntheticKind::kOpposing)};
  LinearCrowdOptions o;
  o.agents = 6;
  o.frames = 40;
  for (auto& s : extract_scenarios(linear_crowd_dataset(o), ScenarioSpec::standard())) {
    if (static_cast<int>(scenarios.size()) >= count) break;
    scenarios.push_back(std::move(s));
  }
  CvmPredictor reference(VelocityFilter{VelocityMode::kLastDifference, 1.5});
  double max_dev = 0.0;
  bool comparable = true;
  for (const auto& s : scenarios) {
    const auto p = session->predict(s);
    const auto ref = reference.predict(s);
    for (const auto& a : ref.agents) {
      const auto* f = p.find(a.agent_id);
      const auto* pts = f ? std::get_if<PointSequence>(f) : nullptr;
      if (!pts) {
        comparable = false;
        continue;
      }
      const auto& rp = std::get<PointSequence>(a.forecast).points;
      for (std::size_t k = 0; k < rp.size(); ++k) max_dev = std::max(max_dev, (pts->points[k] - rp[k]).norm());
    }
  }
  std::cout << "requests: " << scenarios.size() << " ok\n";
  if (comparable) std::cout << "max deviation from single-difference cvm: " << format_double(max_dev) << " m\n";
  const int code = session->shutdown();
  std::cout << "shutdown: exit code " << code << "\n";
  return code == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trajbench: human trajectory prediction benchmark"};
  app.set_version_flag("--version", version());
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string predictor;
  auto* run = app.add_subcommand("run", "Run the experiment described by a YAML config");
  run->add_option("config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--output", output, "output directory (default: config 'output')");
  run->add_option("--predictor", predictor, "override: cvm, cvm-last, sof, kara, external:<command>");

  std::optional<std::size_t> budget;
  std::optional<std::uint64_t> seed;
  auto* cal = app.add_subcommand("calibrate", "Calibrate predictor hyperparameters on each dataset");
  cal->add_option("config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
  cal->add_option("-o,--output", output, "output directory (default: config 'output')");
  cal->add_option("--budget", budget, "trial budget");
  cal->add_option("--seed", seed, "calibration seed");

  std::string kind;
  std::string format;
  int copies = 30;
  int agents = 10;
  int frames = 40;
  std::uint64_t syn_seed = 1;
  double hz = 2.5;
  auto* syn = app.add_subcommand("synthetic", "Write a synthetic dataset");
  syn->add_option("kind", kind, "chasing, opposing, crossing, linear, arc")
      ->required()
      ->check(CLI::IsMember({"chasing", "opposing", "crossing", "linear", "arc"}));
  syn->add_option("-o,--output", output, "dataset file")->required();
  syn->add_option("--format", format, "native or trajnet_json (default: from extension)");
  syn->add_option("--copies", copies, "fixture copies (interaction kinds)")->check(CLI::PositiveNumber);
  syn->add_option("--agents", agents, "agents (linear, arc)")->check(CLI::PositiveNumber);
  syn->add_option("--frames", frames, "frames (linear, arc)")->check(CLI::PositiveNumber);
  syn->add_option("--seed", syn_seed, "random seed (linear)");
  syn->add_option("--hz", hz, "frame rate")->check(CLI::PositiveNumber);

  std::string dataset_path;
  int obs = 8;
  int pred = 12;
  auto* insp = app.add_subcommand("inspect", "Summarize a dataset file");
  insp->add_option("dataset", dataset_path, "dataset file")->required()->check(CLI::ExistingFile);
  insp->add_option("--format", format, "native or trajnet_json (default: from extension)");
  insp->add_option("--observation-frames", obs, "O_p for the scenario count");
  insp->add_option("--prediction-frames", pred, "T_p for the scenario count");

  std::string command;
  double timeout_s = 10.0;
  int count = 20;
  auto* pc = app.add_subcommand("protocol-check", "Handshake with an external predictor and send test requests");
  pc->add_option("command", command, "adapter command line")->required();
  pc->add_option("--timeout", timeout_s, "handshake and request timeout, seconds")->check(CLI::PositiveNumber);
  pc->add_option("--requests", count, "number of test requests")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config_path, output, predictor);
    if (*cal) return cmd_calibrate(config_path, output, budget, seed);
    if (*syn) return cmd_synthetic(kind, output, format, copies, agents, frames, syn_seed, hz);
    if (*insp) return cmd_inspect(dataset_path, format, obs, pred);
    if (*pc) return cmd_protocol_check(command, timeout_s, count);
  } catch (const StageError& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  } catch (const BridgeError& e) {
    std::cerr << "error [bridge] " << e.what() << "\n";
    return 1;
  } catch (const ConfigError& e) {
    std::cerr << "error [config] " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error " << e.what() << "\n";
    return 1;
  }
  return 0;
}
