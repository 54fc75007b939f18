#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajbench/geometry.hpp"

namespace trajbench {

using AgentId = std::int64_t;
using Frame = std::int64_t;

struct Detection {
  Frame frame = 0;
  double time = 0.0;  ///< seconds
  AgentId agent_id = 0;
  Vec2 position = Vec2::Zero();

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// All detections of one agent, strictly increasing in time.
struct AgentTrack {
  AgentId agent_id = 0;     ///< id as it appears in the source file
  std::size_t index = 0;    ///< dense internal index
  std::vector<Detection> detections;

  bool empty() const noexcept { return detections.empty(); }
  std::size_t size() const noexcept { return detections.size(); }
};

enum class CellLabel : std::uint8_t { kFree = 0, kOccupied = 1, kSemantic = 2 };

/// Occupancy / semantic grid plus goal list. Cell (ix, iy) covers the square
/// [origin + (ix, iy) * resolution, origin + (ix + 1, iy + 1) * resolution).
struct EnvironmentModel {
  struct Grid {
    int width = 0;
    int height = 0;
    /// Raw 8-bit values, row-major with row iy = 0 first. 0 = occupied,
    /// 255 = free, anything else is a semantic class id.
    std::vector<std::uint8_t> cells;

    std::uint8_t at(int ix, int iy) const { return cells[static_cast<std::size_t>(iy) * width + ix]; }
  };

  std::optional<Grid> grid;
  double resolution = 1.0;
  Vec2 origin = Vec2::Zero();
  std::vector<Vec2> goals;
  std::string grid_path;  ///< source file of the grid, passed to external predictors

  bool in_bounds(int ix, int iy) const;
  CellLabel label(int ix, int iy) const;
  bool occupied(int ix, int iy) const { return label(ix, iy) == CellLabel::kOccupied; }
  std::uint8_t semantic_id(int ix, int iy) const;
  Vec2 cell_center(int ix, int iy) const;
  /// Cell index containing `p`; may be out of bounds.
  Eigen::Vector2i cell_of(const Vec2& p) const;
  /// Centers of all occupied cells.
  std::vector<Vec2> occupied_centers() const;

  void validate() const;
};

struct Dataset {
  std::string name;
  double frequency_hz = 0.0;
  std::vector<AgentTrack> tracks;  ///< sorted by agent_id; track.index == position
  std::shared_ptr<const EnvironmentModel> environment;

  double dt() const { return 1.0 / frequency_hz; }
  std::size_t detection_count() const;
  /// Earliest and latest detection time; throws on empty dataset.
  std::pair<double, double> time_span() const;
  const AgentTrack* find(AgentId id) const;

  /// Re-establish the dense index and track ordering after edits.
  void reindex();
  /// Throws ValidationError on any broken invariant.
  void validate() const;
};

/// Builds a Dataset from loose detections: groups by agent, sorts by time,
/// checks duplicates. `frequency_hz` <= 0 means infer from the median interval.
Dataset assemble_dataset(std::vector<Detection> detections, double frequency_hz, std::string name);

/// frame = round((time - t0) * frequency_hz), bumped to stay strictly
/// increasing within each track. Used for time-only inputs.
void assign_frames_from_time(Dataset& dataset);

/// 1 / median inter-detection interval, snapped to 1e-6 Hz.
double infer_frequency(const std::vector<AgentTrack>& tracks);

}  // namespace trajbench
