#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "trajbench/calibration.hpp"
#include "trajbench/config.hpp"
#include "trajbench/metrics.hpp"
#include "trajbench/report.hpp"

namespace trajbench {

/// Loads and preprocesses a configured dataset source.
Dataset prepare_dataset(const DatasetSource& source, const PreprocessConfig& preprocess);

/// Creates the configured predictor; `params` overrides configured params.
std::unique_ptr<Predictor> make_predictor(const PredictorConfig& config, const ParamSet& params = {});

struct Evaluation {
  std::vector<ScenarioScore> scores;  ///< one per scenario, canonical anchor order
};

/// Runs the predictor on every scenario and scores target agents.
Evaluation evaluate(Predictor& predictor, const std::vector<Scenario>& scenarios);

/// Adds observation noise (ground truth stays clean), keyed by (seed, agent, frame).
std::vector<Scenario> perturb_observations(const std::vector<Scenario>& scenarios, double sigma, std::uint64_t seed);

/// ade/fde(/nlp) cells for one group.
MetricReport report_evaluation(const Evaluation& evaluation, const std::string& sweep, const std::string& group);

struct RuntimeRow {
  std::size_t agents = 0;
  std::size_t calls = 0;
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double max_ms = 0.0;
};

/// Times only the predict call, binned by agent count, after 3 warm-up calls per bin.
std::vector<RuntimeRow> profile_runtime(Predictor& predictor, const std::vector<Scenario>& scenarios,
                                        int warmup_calls = 3);
std::string runtime_csv(const std::vector<RuntimeRow>& rows);

struct NamedCalibration {
  std::string dataset;
  CalibrationResult result;
};

/// calibration.trace: every trace prefixed with a dataset column.
std::string calibration_trace_csv(const std::vector<NamedCalibration>& calibrations);

struct RunOutput {
  MetricReport report;
  std::vector<NamedCalibration> calibrations;
  std::vector<RuntimeRow> runtime;
  std::vector<std::string> notes;
};

/// Evaluation pipeline: load -> preprocess -> [calibrate] -> extract -> predict -> score -> aggregate.
RunOutput run_single(const ExperimentConfig& config);
RunOutput run_horizon_sweep(const ExperimentConfig& config, const std::vector<double>& horizons_s);
RunOutput run_observation_sweep(const ExperimentConfig& config, const std::vector<double>& observation_s);
RunOutput run_noise_sweep(const ExperimentConfig& config, const std::vector<double>& sigmas);
RunOutput run_transfer(const ExperimentConfig& config);
RunOutput run_runtime_profile(const ExperimentConfig& config);
RunOutput run_crowd_breakdown(const ExperimentConfig& config);

/// Calibrates on every dataset's calibration split; no evaluation.
RunOutput run_calibration(const ExperimentConfig& config);

/// Dispatches on config.kind.
RunOutput run_experiment(const ExperimentConfig& config);

/// report.csv and report.meta; calibration.trace plus calibrated_<dataset>.yaml,
/// and runtime.csv, when present.
void write_outputs(const RunOutput& output, const std::filesystem::path& directory);

/// Library version string.
std::string version();

}  // namespace trajbench
