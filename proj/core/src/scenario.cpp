#include "trajbench/scenario.hpp"

#include <algorithm>
#include <limits>

#include "trajbench/error.hpp"

namespace trajbench {

void ScenarioSpec::validate() const {
  if (observation_frames < 2) throw ConfigError("observation length must be at least 2 frames");
  if (prediction_frames < 1) throw ConfigError("prediction horizon must be at least 1 frame");
  if (min_agents < 1) throw ConfigError("min_agents must be >= 1");
  if (stride < 1) throw ConfigError("stride must be >= 1");
}

std::size_t Scenario::target_count() const {
  return static_cast<std::size_t>(std::count_if(agents.begin(), agents.end(), [](const auto& a) { return a.is_target; }));
}

namespace {

/// Maximal run of consecutive frames within one track.
struct Segment {
  std::size_t track = 0;
  std::size_t first = 0;  ///< detection index
  Frame start = 0;
  Frame end = 0;  ///< inclusive
};

std::vector<Segment> segments_of(const AgentTrack& track, std::size_t track_pos) {
  std::vector<Segment> out;
  const auto& d = track.detections;
  std::size_t k = 0;
  while (k < d.size()) {
    std::size_t e = k;
    while (e + 1 < d.size() && d[e + 1].frame == d[e].frame + 1) ++e;
    out.push_back({track_pos, k, d[k].frame, d[e].frame});
    k = e + 1;
  }
  return out;
}

Frame ceil_div(Frame a, Frame b) { return a >= 0 ? (a + b - 1) / b : -((-a) / b); }
Frame floor_div(Frame a, Frame b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

}  // namespace

std::vector<Scenario> extract_scenarios(const Dataset& dataset, const ScenarioSpec& spec) {
  spec.validate();
  const Frame obs = spec.observation_frames;
  const Frame pred = spec.prediction_frames;
  Frame f_min = std::numeric_limits<Frame>::max();
  Frame f_max = std::numeric_limits<Frame>::min();
  for (const auto& t : dataset.tracks) {
    if (t.empty()) continue;
    f_min = std::min(f_min, t.detections.front().frame);
    f_max = std::max(f_max, t.detections.back().frame);
  }
  if (f_min > f_max) return {};
  const Frame first_anchor = f_min + obs - 1;
  if (first_anchor > f_max) return {};
  const auto anchor_count = static_cast<std::size_t>((f_max - first_anchor) / spec.stride + 1);

  struct Member {
    const Segment* segment;
    bool target;
  };
  std::vector<std::vector<Member>> buckets(anchor_count);
  std::vector<std::vector<Segment>> segments;
  segments.reserve(dataset.tracks.size());
  for (std::size_t ti = 0; ti < dataset.tracks.size(); ++ti) segments.push_back(segments_of(dataset.tracks[ti], ti));

  // Tracks are sorted by agent id, so each bucket ends up ordered by agent id.
  for (const auto& track_segments : segments) {
    for (const auto& seg : track_segments) {
      const Frame lo = std::max(seg.start + obs - 1, first_anchor);
      const Frame hi = seg.end;
      if (lo > hi) continue;
      const Frame k_lo = ceil_div(lo - first_anchor, spec.stride);
      const Frame k_hi = std::min<Frame>(floor_div(hi - first_anchor, spec.stride), static_cast<Frame>(anchor_count) - 1);
      for (Frame k = k_lo; k <= k_hi; ++k) {
        const Frame anchor = first_anchor + k * spec.stride;
        buckets[static_cast<std::size_t>(k)].push_back({&seg, anchor + pred <= seg.end});
      }
    }
  }

  std::vector<Scenario> out;
  const double dt = dataset.dt();
  for (std::size_t k = 0; k < anchor_count; ++k) {
    const auto& members = buckets[k];
    if (members.size() < static_cast<std::size_t>(spec.min_agents)) continue;
    if (std::none_of(members.begin(), members.end(), [](const Member& m) { return m.target; })) continue;
    const Frame anchor = first_anchor + static_cast<Frame>(k) * spec.stride;
    Scenario s;
    s.anchor = anchor;
    s.dt = dt;
    s.prediction_frames = spec.prediction_frames;
    s.environment = dataset.environment;
    for (const auto& m : members) {
      const auto& track = dataset.tracks[m.segment->track];
      const auto anchor_idx = m.segment->first + static_cast<std::size_t>(anchor - m.segment->start);
      ScenarioAgent a;
      a.agent_id = track.agent_id;
      a.is_target = m.target;
      for (std::size_t i = anchor_idx + 1 - static_cast<std::size_t>(obs); i <= anchor_idx; ++i)
        a.observed.push_back(track.detections[i].position);
      if (a.is_target)
        for (std::size_t i = anchor_idx + 1; i <= anchor_idx + static_cast<std::size_t>(pred); ++i)
          a.future_gt.push_back(track.detections[i].position);
      s.anchor_time = track.detections[anchor_idx].time;
      s.agents.push_back(std::move(a));
    }
    out.push_back(std::move(s));
  }
  return out;
}

Scenario truncate_scenario(const Scenario& scenario, int observation_frames, int prediction_frames) {
  Scenario out = scenario;
  out.prediction_frames = prediction_frames;
  for (auto& a : out.agents) {
    if (static_cast<int>(a.observed.size()) < observation_frames)
      throw ValidationError("scenario has fewer observations than requested");
    a.observed.erase(a.observed.begin(), a.observed.end() - observation_frames);
    if (a.is_target) {
      if (static_cast<int>(a.future_gt.size()) < prediction_frames)
        throw ValidationError("scenario has a shorter ground truth than requested");
      a.future_gt.resize(static_cast<std::size_t>(prediction_frames));
    }
  }
  return out;
}

std::map<std::size_t, std::size_t> scenario_count_by_crowd(const std::vector<Scenario>& scenarios) {
  std::map<std::size_t, std::size_t> hist;
  for (const auto& s : scenarios) ++hist[s.agents.size()];
  return hist;
}

}  // namespace trajbench
