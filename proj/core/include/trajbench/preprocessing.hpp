#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "trajbench/dataset.hpp"

namespace trajbench {

enum class SmoothingEdge {
  kSymmetric,  ///< radius shrinks to the distance from the nearest track end
  kTruncated,  ///< full radius, clipped to the available samples
};

struct PreprocessConfig {
  double target_hz = 0.0;  ///< <= 0 keeps the source frequency
  int smoothing_window = 5;
  SmoothingEdge smoothing_edge = SmoothingEdge::kSymmetric;
  double gap_tolerance_factor = 1.5;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  void validate() const;
};

struct Gap {
  double start = 0.0;
  double end = 0.0;
  friend bool operator==(const Gap&, const Gap&) = default;
};

std::vector<Gap> detect_gaps(const AgentTrack& track, double expected_dt, double gap_tolerance_factor = 1.5);

/// Fills every gap (as found by detect_gaps) with round(dt_gap / expected_dt) - 1
/// evenly spaced, linearly interpolated detections. Originals are kept as-is.
AgentTrack interpolate_gaps(const AgentTrack& track, double expected_dt, double gap_tolerance_factor = 1.5);

/// Centered moving average of the positions; timestamps are untouched.
AgentTrack smooth(const AgentTrack& track, int window, SmoothingEdge edge = SmoothingEdge::kSymmetric);

/// Adds N(0, sigma^2) to each coordinate. Draws are keyed by
/// (seed, agent_id, frame), so results do not depend on processing order.
AgentTrack inject_noise(const AgentTrack& track, double sigma, std::uint64_t seed);

/// The 2D standard-normal draw used for detection (agent, frame) under `seed`.
Vec2 noise_draw(std::uint64_t seed, AgentId agent, Frame frame);

/// Integer ratio: keep every k-th frame. Otherwise resample each track on the
/// target time grid by linear interpolation. Output frames index that grid.
Dataset downsample(const Dataset& dataset, double target_hz);

/// downsample -> interpolate -> smooth -> noise.
Dataset preprocess(const Dataset& dataset, const PreprocessConfig& config);

}  // namespace trajbench
