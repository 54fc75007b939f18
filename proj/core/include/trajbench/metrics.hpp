#pragma once

#include <span>
#include <string>
#include <vector>

#include "trajbench/geometry.hpp"
#include "trajbench/prediction.hpp"
#include "trajbench/scenario.hpp"

namespace trajbench {

/// Mean Euclidean distance over timesteps.
double ade(std::span<const Vec2> predicted, std::span<const Vec2> gt);
/// Distance at the last timestep.
double fde(std::span<const Vec2> predicted, std::span<const Vec2> gt);
double top_k_ade(const SampleSet& samples, std::span<const Vec2> gt);
double top_k_fde(const SampleSet& samples, std::span<const Vec2> gt);

inline constexpr double kDensityFloor = 1e-12;

double gaussian_density(const Gaussian2& g, const Vec2& x);
/// sum_i pi_i N(x; mu_i,t, Sigma_i,t)
double mixture_density(const GaussianMixtureSequence& mixture, std::size_t step, const Vec2& x);
/// Cell mass divided by cell area; 0 outside the grid.
double grid_density(const ProbabilityGrid& grid, const Vec2& x);

/// Mean over timesteps of -log(max(density, 1e-12)), in nats.
double nlp(const GaussianMixtureSequence& mixture, std::span<const Vec2> gt);
double nlp(const GridSequence& grids, std::span<const Vec2> gt);

/// Metric values of one agent. NLP is only defined for distributional forecasts.
struct AgentScore {
  AgentId agent_id = 0;
  double ade = 0.0;
  double fde = 0.0;
  std::optional<double> nlp;
};

/// ADE/FDE use the best of K for sample sets (a point sequence is K = 1) and
/// the most likely path for grids and mixtures.
AgentScore score_forecast(AgentId id, const Forecast& forecast, std::span<const Vec2> gt);

/// Scores every target agent of `scenario`.
std::vector<AgentScore> score_scenario(const Scenario& scenario, const Prediction& prediction);

struct ScenarioScore {
  std::size_t agents = 0;   ///< crowd size of the scenario
  std::size_t targets = 0;
  double ade = 0.0;         ///< mean over target agents
  double fde = 0.0;
  std::optional<double> nlp;
};

ScenarioScore summarize(const Scenario& scenario, const std::vector<AgentScore>& scores);

}  // namespace trajbench
