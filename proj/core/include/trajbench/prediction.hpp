#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trajbench/dataset.hpp"
#include "trajbench/geometry.hpp"

namespace trajbench {

struct PointSequence {
  Path points;
};

/// K sampled futures, each of T_p positions.
struct SampleSet {
  std::vector<Path> samples;
};

/// Probability mass over an axis-aligned grid for one timestep.
struct ProbabilityGrid {
  Vec2 origin = Vec2::Zero();
  double resolution = 1.0;
  int width = 0;
  int height = 0;
  std::vector<double> mass;  ///< row-major, row 0 = lowest y

  double at(int ix, int iy) const { return mass[static_cast<std::size_t>(iy) * width + ix]; }
};

struct GridSequence {
  std::vector<ProbabilityGrid> grids;
};

struct Gaussian2 {
  Vec2 mean = Vec2::Zero();
  Mat2 covariance = Mat2::Identity();
};

/// K modes, each a sequence of T_p Gaussians, with mixture weights.
struct GaussianMixtureSequence {
  std::vector<double> weights;
  std::vector<std::vector<Gaussian2>> modes;
};

using Forecast = std::variant<PointSequence, SampleSet, GridSequence, GaussianMixtureSequence>;

std::string_view representation_name(const Forecast& forecast);

struct AgentForecast {
  AgentId agent_id = 0;
  Forecast forecast;
};

struct Prediction {
  std::vector<AgentForecast> agents;

  const Forecast* find(AgentId id) const;
};

inline constexpr double kGridMassTolerance = 1e-6;
inline constexpr double kMixtureWeightTolerance = 1e-9;

/// Throws ValidationError when a representation invariant is broken or the
/// horizon differs from `horizon` (pass 0 to skip the length check).
void validate_forecast(const Forecast& forecast, std::size_t horizon);
void validate_prediction(const Prediction& prediction, std::size_t horizon);

bool is_spd(const Mat2& m);

/// Horizon length of a forecast (T_p).
std::size_t forecast_horizon(const Forecast& forecast);

/// Single most likely path: points as-is, first sample, heaviest mode's means,
/// or the arg-max cell centers of each grid.
Path most_likely_path(const Forecast& forecast);

}  // namespace trajbench
