#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "trajbench/dataset.hpp"
#include "trajbench/predictors.hpp"
#include "trajbench/scenario.hpp"

namespace trajbench {

enum class ParamScale { kLinear, kLog };

struct ParamDim {
  std::string name;
  double lower = 0.0;
  double upper = 1.0;
  ParamScale scale = ParamScale::kLinear;
};

struct ParamSpace {
  std::vector<ParamDim> dims;

  void validate() const;
  bool contains(const ParamSet& params) const;
  /// Default search spaces for "sof" and "kara"; empty for "cvm".
  static ParamSpace for_predictor(const std::string& predictor_id);
};

struct Trial {
  std::size_t index = 0;
  ParamSet params;
  double value = 0.0;
  double elapsed_s = 0.0;  ///< wall time since calibration start
};

struct CalibrationResult {
  ParamSet best_params;
  double best_value = 0.0;
  std::vector<Trial> trace;
  std::uint64_t seed = 0;
  std::size_t budget = 0;

  std::string trace_csv() const;
};

struct CalibrationOptions {
  std::size_t budget = 200;
  std::uint64_t seed = 0;
  double objective_horizon_s = 4.8;  ///< objective = mean FDE at this horizon
  bool refine = true;
  double refine_fraction = 0.3;  ///< share of the budget spent on coordinate refinement
  double refine_step = 0.2;      ///< initial step as a fraction of each dimension's range
};

/// Calibration subset: detections with time < t_min + fraction * (t_max - t_min);
/// holdout: the rest.
std::pair<Dataset, Dataset> split_calibration(const Dataset& dataset, double fraction);

/// Objective evaluated on one parameter set.
using Objective = std::function<double(const ParamSet&)>;

/// Trial 0 evaluates `defaults`; the next trials sample the space uniformly
/// (log-uniformly for log dims) with one sub-seed per trial index; the rest of
/// the budget refines the incumbent coordinate-wise.
CalibrationResult minimize(const Objective& objective, const ParamSpace& space, const ParamSet& defaults,
                           const CalibrationOptions& options);

/// Mean FDE at the objective horizon of a built-in predictor over the
/// scenarios of `dataset`.
CalibrationResult calibrate(const std::string& predictor_id, const ParamSpace& space, const Dataset& dataset,
                            const ScenarioSpec& spec, const CalibrationOptions& options,
                            const VelocityFilter& filter = {});

}  // namespace trajbench
