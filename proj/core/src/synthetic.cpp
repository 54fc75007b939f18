#include "trajbench/synthetic.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "trajbench/error.hpp"

namespace trajbench {

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "chasing") return SyntheticKind::kChasing;
  if (name == "opposing") return SyntheticKind::kOpposing;
  if (name == "crossing") return SyntheticKind::kCrossing;
  throw ValidationError("unknown synthetic scenario kind '" + std::string(name) + "'");
}

std::string_view to_string(SyntheticKind kind) {
  switch (kind) {
    case SyntheticKind::kChasing: return "chasing";
    case SyntheticKind::kOpposing: return "opposing";
    case SyntheticKind::kCrossing: return "crossing";
  }
  return "unknown";
}

namespace {

void check(const SyntheticOptions& o) {
  if (!(o.speed > 0.0) || !(o.hz > 0.0) || o.observation_frames < 2 || o.prediction_frames < 1 || o.y_offset < 0.0 ||
      !(o.chase_gap > 0.0))
    throw ValidationError("synthetic scenario parameters must be positive");
}

/// Positions of both agents for frames 0 .. O_p + T_p - 1.
std::array<Path, 2> fixture_paths(SyntheticKind kind, const SyntheticOptions& o) {
  check(o);
  const int frames = o.observation_frames + o.prediction_frames;
  const double step = o.speed / o.hz;
  std::array<Path, 2> paths;
  for (int k = 0; k < frames; ++k) {
    switch (kind) {
      case SyntheticKind::kOpposing: {
        const double x = step * (k - o.observation_frames);
        paths[0].emplace_back(x, 0.0);
        paths[1].emplace_back(-x, o.y_offset);
        break;
      }
      case SyntheticKind::kChasing: {
        const double x = step * (k - o.observation_frames);
        paths[0].emplace_back(x, 0.0);
        paths[1].emplace_back(x - o.chase_gap, 0.0);
        break;
      }
      case SyntheticKind::kCrossing: {
        const double s = step * (k - (o.observation_frames + o.prediction_frames / 2));
        paths[0].emplace_back(s, 0.0);
        paths[1].emplace_back(0.0, s);
        break;
      }
    }
  }
  return paths;
}

}  // namespace

Scenario generate_synthetic(SyntheticKind kind, const SyntheticOptions& options) {
  const auto paths = fixture_paths(kind, options);
  Scenario s;
  s.anchor = options.observation_frames - 1;
  s.anchor_time = s.anchor / options.hz;
  s.dt = 1.0 / options.hz;
  s.prediction_frames = options.prediction_frames;
  const auto split = static_cast<std::ptrdiff_t>(options.observation_frames);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    ScenarioAgent a;
    a.agent_id = static_cast<AgentId>(i + 1);
    a.observed.assign(paths[i].begin(), paths[i].begin() + split);
    a.future_gt.assign(paths[i].begin() + split, paths[i].end());
    a.is_target = true;
    s.agents.push_back(std::move(a));
  }
  return s;
}

Dataset synthetic_crowd(SyntheticKind kind, int copies, double spacing, int frame_offset, const SyntheticOptions& options) {
  if (copies < 1 || frame_offset < 0) throw ValidationError("synthetic crowd needs copies >= 1 and frame_offset >= 0");
  const auto paths = fixture_paths(kind, options);
  std::vector<Detection> dets;
  for (int c = 0; c < copies; ++c) {
    const Vec2 shift(0.0, c * spacing);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      for (std::size_t k = 0; k < paths[i].size(); ++k) {
        Detection d;
        d.agent_id = static_cast<AgentId>(2 * c + static_cast<int>(i) + 1);
        d.frame = static_cast<Frame>(c) * frame_offset + static_cast<Frame>(k);
        d.time = static_cast<double>(d.frame) / options.hz;
        d.position = paths[i][k] + shift;
        dets.push_back(d);
      }
    }
  }
  return assemble_dataset(std::move(dets), options.hz, std::string(to_string(kind)));
}

Dataset synthetic_dataset(SyntheticKind kind, const SyntheticOptions& options) {
  return synthetic_crowd(kind, 1, 0.0, 0, options);
}

Dataset linear_crowd_dataset(const LinearCrowdOptions& o) {
  if (o.agents < 1 || o.frames < 1 || !(o.hz > 0.0) || o.min_speed < 0.0 || o.max_speed < o.min_speed)
    throw ValidationError("invalid linear crowd options");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(o.min_speed, o.max_speed);
  std::vector<Detection> dets;
  for (int i = 0; i < o.agents; ++i) {
    const double heading = angle(rng);
    const double v = speed(rng);
    const Vec2 start(0.0, i * o.spacing);
    const Vec2 vel = v * Vec2(std::cos(heading), std::sin(heading));
    for (int k = 0; k < o.frames; ++k) {
      const double t = k / o.hz;
      dets.push_back({k, t, i + 1, start + t * vel});
    }
  }
  return assemble_dataset(std::move(dets), o.hz, "linear");
}

Dataset circular_arc_dataset(int agents, int frames, double radius, double speed, double hz) {
  if (agents < 1 || frames < 1 || !(radius > 0.0) || !(speed > 0.0) || !(hz > 0.0))
    throw ValidationError("invalid circular arc options");
  std::vector<Detection> dets;
  const double omega = speed / radius;
  for (int i = 0; i < agents; ++i) {
    const Vec2 center(i * 3.0 * radius, 0.0);
    const double phase = 0.7 * i;
    for (int k = 0; k < frames; ++k) {
      const double t = k / hz;
      const double a = omega * t + phase;
      dets.push_back({k, t, i + 1, center + radius * Vec2(std::cos(a), std::sin(a))});
    }
  }
  return assemble_dataset(std::move(dets), hz, "arc");
}

}  // namespace trajbench
