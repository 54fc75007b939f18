#pragma once

#include <cstdint>
#include <string_view>

#include "trajbench/dataset.hpp"
#include "trajbench/scenario.hpp"

namespace trajbench {

enum class SyntheticKind { kChasing, kOpposing, kCrossing };

SyntheticKind parse_synthetic_kind(std::string_view name);
std::string_view to_string(SyntheticKind kind);

struct SyntheticOptions {
  double speed = 1.0;      ///< m/s
  double y_offset = 0.2;   ///< m, lateral displacement of the second agent (opposing)
  double hz = 2.5;
  int observation_frames = 8;
  int prediction_frames = 12;
  double chase_gap = 1.0;  ///< m, distance between the chasing agents
};

/// Two-agent interaction fixtures with exact constant-velocity observations
/// and straight-continuation ground truth.
///   opposing: agent 1 at (-v*O_p/hz + v*k/hz, 0) heading +x, agent 2 mirrored at y = y_offset.
///   chasing:  both heading +x on y = 0, the follower chase_gap behind the leader.
///   crossing: agent 1 heading +x on y = 0, agent 2 heading +y on x = 0, both
///             reaching the origin at frame O_p + T_p / 2.
Scenario generate_synthetic(SyntheticKind kind, const SyntheticOptions& options = {});

/// The same fixture as a detection stream (frames 0 .. O_p + T_p - 1).
Dataset synthetic_dataset(SyntheticKind kind, const SyntheticOptions& options = {});

/// Several copies of `kind`, each shifted by `spacing` meters along y and started
/// `frame_offset * i` frames later so extraction yields many scenarios.
Dataset synthetic_crowd(SyntheticKind kind, int copies, double spacing, int frame_offset,
                        const SyntheticOptions& options = {});

struct LinearCrowdOptions {
  int agents = 10;
  int frames = 40;
  double hz = 2.5;
  double min_speed = 0.5;
  double max_speed = 1.8;
  double spacing = 4.0;  ///< m between agent lanes
  std::uint64_t seed = 1;
};

/// Agents on parallel-free straight lines with random headings and speeds,
/// all present on every frame.
Dataset linear_crowd_dataset(const LinearCrowdOptions& options);

/// Agents moving on circular arcs of `radius` meters at `speed` m/s.
Dataset circular_arc_dataset(int agents, int frames, double radius, double speed, double hz);

}  // namespace trajbench
