#include "trajbench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <set>

#include "trajbench/error.hpp"

namespace trajbench {

bool EnvironmentModel::in_bounds(int ix, int iy) const {
  return grid && ix >= 0 && iy >= 0 && ix < grid->width && iy < grid->height;
}

CellLabel EnvironmentModel::label(int ix, int iy) const {
  if (!in_bounds(ix, iy)) return CellLabel::kFree;
  const auto v = grid->at(ix, iy);
  if (v == 0) return CellLabel::kOccupied;
  if (v == 255) return CellLabel::kFree;
  return CellLabel::kSemantic;
}

std::uint8_t EnvironmentModel::semantic_id(int ix, int iy) const {
  return in_bounds(ix, iy) ? grid->at(ix, iy) : 255;
}

Vec2 EnvironmentModel::cell_center(int ix, int iy) const {
  return origin + Vec2(ix + 0.5, iy + 0.5) * resolution;
}

Eigen::Vector2i EnvironmentModel::cell_of(const Vec2& p) const {
  const Vec2 rel = (p - origin) / resolution;
  return {static_cast<int>(std::floor(rel.x())), static_cast<int>(std::floor(rel.y()))};
}

std::vector<Vec2> EnvironmentModel::occupied_centers() const {
  std::vector<Vec2> out;
  if (!grid) return out;
  for (int iy = 0; iy < grid->height; ++iy)
    for (int ix = 0; ix < grid->width; ++ix)
      if (occupied(ix, iy)) out.push_back(cell_center(ix, iy));
  return out;
}

void EnvironmentModel::validate() const {
  if (!(resolution > 0.0) || !std::isfinite(resolution)) throw ValidationError("grid resolution must be > 0");
  if (!origin.allFinite()) throw ValidationError("grid origin must be finite");
  for (const auto& g : goals)
    if (!g.allFinite()) throw ValidationError("goal coordinates must be finite");
  if (grid) {
    if (grid->width < 1 || grid->height < 1) throw ValidationError("grid must be at least 1x1");
    if (grid->cells.size() != static_cast<std::size_t>(grid->width) * grid->height)
      throw ValidationError("grid cell count does not match its dimensions");
  }
}

std::size_t Dataset::detection_count() const {
  std::size_t n = 0;
  for (const auto& t : tracks) n += t.size();
  return n;
}

std::pair<double, double> Dataset::time_span() const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& t : tracks) {
    if (t.empty()) continue;
    lo = std::min(lo, t.detections.front().time);
    hi = std::max(hi, t.detections.back().time);
  }
  if (lo > hi) throw ValidationError("empty dataset");
  return {lo, hi};
}

const AgentTrack* Dataset::find(AgentId id) const {
  auto it = std::lower_bound(tracks.begin(), tracks.end(), id,
                             [](const AgentTrack& t, AgentId v) { return t.agent_id < v; });
  return (it != tracks.end() && it->agent_id == id) ? &*it : nullptr;
}

void Dataset::reindex() {
  std::erase_if(tracks, [](const AgentTrack& t) { return t.empty(); });
  std::sort(tracks.begin(), tracks.end(), [](const auto& a, const auto& b) { return a.agent_id < b.agent_id; });
  for (std::size_t i = 0; i < tracks.size(); ++i) tracks[i].index = i;
}

void Dataset::validate() const {
  if (!(frequency_hz > 0.0) || !std::isfinite(frequency_hz)) throw ValidationError("frequency_hz must be > 0");
  for (std::size_t i = 0; i < tracks.size(); ++i) {
    const auto& t = tracks[i];
    if (t.index != i) throw ValidationError("track index is not dense");
    if (i > 0 && tracks[i - 1].agent_id >= t.agent_id) throw ValidationError("tracks not sorted by agent id");
    for (std::size_t k = 0; k < t.detections.size(); ++k) {
      const auto& d = t.detections[k];
      if (d.agent_id != t.agent_id) throw ValidationError("detection agent id differs from its track");
      if (!d.position.allFinite() || !std::isfinite(d.time)) throw ValidationError("non-finite detection");
      if (k > 0 && !(d.time > t.detections[k - 1].time))
        throw ValidationError("track " + std::to_string(t.agent_id) + " timestamps not strictly increasing");
    }
  }
  if (environment) environment->validate();
}

double infer_frequency(const std::vector<AgentTrack>& tracks) {
  std::vector<double> intervals;
  for (const auto& t : tracks)
    for (std::size_t k = 1; k < t.detections.size(); ++k)
      intervals.push_back(t.detections[k].time - t.detections[k - 1].time);
  if (intervals.empty()) throw ValidationError("cannot infer frequency: no track has two detections");
  const auto mid = intervals.begin() + static_cast<std::ptrdiff_t>(intervals.size() / 2);
  std::nth_element(intervals.begin(), mid, intervals.end());
  double median = *mid;
  if (intervals.size() % 2 == 0) {
    const double lower = *std::max_element(intervals.begin(), mid);
    median = 0.5 * (median + lower);
  }
  if (!(median > 0.0)) throw ValidationError("cannot infer frequency: median interval is zero");
  return std::round(1e6 / median) / 1e6;
}

void assign_frames_from_time(Dataset& dataset) {
  const double t0 = dataset.time_span().first;
  for (auto& t : dataset.tracks) {
    Frame prev = std::numeric_limits<Frame>::min();
    for (auto& d : t.detections) {
      d.frame = std::max<Frame>(std::llround((d.time - t0) * dataset.frequency_hz), prev == std::numeric_limits<Frame>::min() ? prev : prev + 1);
      prev = d.frame;
    }
  }
}

Dataset assemble_dataset(std::vector<Detection> detections, double frequency_hz, std::string name) {
  if (detections.empty()) throw ValidationError("empty dataset");
  std::map<AgentId, std::vector<Detection>> by_agent;
  for (auto& d : detections) {
    if (!d.position.allFinite() || !std::isfinite(d.time))
      throw ValidationError("non-finite coordinates for agent " + std::to_string(d.agent_id));
    by_agent[d.agent_id].push_back(d);
  }
  Dataset ds;
  ds.name = std::move(name);
  for (auto& [id, dets] : by_agent) {
    std::sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
      return a.time != b.time ? a.time < b.time : a.frame < b.frame;
    });
    std::set<Frame> frames;
    for (std::size_t k = 0; k < dets.size(); ++k) {
      if (!frames.insert(dets[k].frame).second || (k > 0 && dets[k].time == dets[k - 1].time))
        throw ValidationError("duplicate detection for agent " + std::to_string(id) + " at frame " +
                              std::to_string(dets[k].frame));
    }
    ds.tracks.push_back(AgentTrack{id, 0, std::move(dets)});
  }
  ds.reindex();
  ds.frequency_hz = frequency_hz > 0.0 ? frequency_hz : infer_frequency(ds.tracks);
  return ds;
}

}  // namespace trajbench
