#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <vector>

#include "trajbench/dataset.hpp"

namespace trajbench {

struct ScenarioSpec {
  int observation_frames = 8;  ///< O_p
  int prediction_frames = 12;  ///< T_p
  int min_agents = 2;
  int stride = 1;

  double observation_seconds(double hz) const { return observation_frames / hz; }
  double prediction_seconds(double hz) const { return prediction_frames / hz; }

  void validate() const;

  static ScenarioSpec standard() { return {}; }
  /// O_s = 2.4 s, T_s = 4.0 s at 2.5 Hz.
  static ScenarioSpec eth() { return {6, 10, 2, 1}; }
};

struct ScenarioAgent {
  AgentId agent_id = 0;
  Path observed;   ///< exactly O_p positions, the last one at the anchor frame
  Path future_gt;  ///< T_p positions for targets, empty for context agents
  bool is_target = false;
};

struct Scenario {
  Frame anchor = 0;
  double anchor_time = 0.0;
  double dt = 0.0;
  int prediction_frames = 0;
  std::vector<ScenarioAgent> agents;  ///< ordered by agent id
  std::shared_ptr<const EnvironmentModel> environment;

  std::size_t target_count() const;
  int observation_frames() const { return agents.empty() ? 0 : static_cast<int>(agents.front().observed.size()); }
};

/// One candidate per anchor on the stride grid starting at first_frame + O_p - 1.
/// Agents join when seen on all O_p observation frames; they are targets when
/// also seen on all T_p following frames.
std::vector<Scenario> extract_scenarios(const Dataset& dataset, const ScenarioSpec& spec);

/// Keeps the last `observation_frames` observations and the first
/// `prediction_frames` ground-truth points of each agent.
Scenario truncate_scenario(const Scenario& scenario, int observation_frames, int prediction_frames);

/// Number of scenarios per agent count.
std::map<std::size_t, std::size_t> scenario_count_by_crowd(const std::vector<Scenario>& scenarios);

}  // namespace trajbench
