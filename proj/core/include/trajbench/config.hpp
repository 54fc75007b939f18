#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trajbench/dataset_io.hpp"
#include "trajbench/predictors.hpp"
#include "trajbench/preprocessing.hpp"
#include "trajbench/scenario.hpp"
#include "trajbench/synthetic.hpp"

namespace trajbench {

inline constexpr int kConfigSchemaVersion = 1;

enum class ExperimentKind { kSingle, kHorizonSweep, kObservationSweep, kNoiseSweep, kTransfer, kRuntime, kCrowdBreakdown };

ExperimentKind parse_experiment_kind(std::string_view name);
std::string_view to_string(ExperimentKind kind);

/// Either a file on disk or a generated fixture.
struct DatasetSource {
  std::string name;
  std::filesystem::path path;
  DatasetFormat format = DatasetFormat::kNative;
  std::optional<std::filesystem::path> environment;  ///< grid map with sidecar
  std::optional<std::filesystem::path> goals;
  double calibration_fraction = 0.3;

  /// Generated instead of loaded: "linear", "arc", "chasing", "opposing", "crossing".
  std::optional<std::string> synthetic;
  int synthetic_agents = 10;
  int synthetic_frames = 40;
  std::uint64_t synthetic_seed = 1;
};

struct PredictorConfig {
  std::string kind = "cvm";      ///< cvm | sof | kara | external
  std::string command;           ///< external only
  VelocityFilter filter;
  ParamSet params;
  std::optional<std::filesystem::path> params_file;
  double timeout_s = 10.0;
  double handshake_timeout_s = 10.0;
};

struct CalibrationConfig {
  bool enabled = false;
  std::size_t budget = 200;
  std::uint64_t seed = 0;
  double objective_horizon_s = 4.8;
  bool refine = true;
};

struct ExperimentConfig {
  int version = kConfigSchemaVersion;
  std::string name = "experiment";
  std::vector<DatasetSource> datasets;
  PreprocessConfig preprocess;
  ScenarioSpec scenario;
  PredictorConfig predictor;
  CalibrationConfig calibration;
  ExperimentKind kind = ExperimentKind::kSingle;
  std::vector<double> values;  ///< sweep values: seconds for horizon/observation sweeps, meters for noise
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  std::uint64_t config_hash = 0;  ///< FNV-1a of the config text

  void validate() const;
};

/// Parses the YAML run configuration. Relative paths resolve against
/// `base_dir`. Unknown keys are errors.
ExperimentConfig parse_config(const std::string& yaml_text, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// Flat "key: value" document of calibrated parameters.
ParamSet load_params_file(const std::filesystem::path& path);
void write_params_file(const ParamSet& params, const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

/// Seconds to whole frames; throws ConfigError unless seconds * hz is integral.
int seconds_to_frames(double seconds, double hz, std::string_view what);

}  // namespace trajbench
