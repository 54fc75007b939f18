#include "trajbench/preprocessing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "trajbench/error.hpp"

namespace trajbench {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Vec2 lerp(const Vec2& a, const Vec2& b, double s) { return a + s * (b - a); }

}  // namespace

void PreprocessConfig::validate() const {
  if (target_hz < 0.0 || !std::isfinite(target_hz)) throw ConfigError("target_hz must be positive (or 0 to keep)");
  if (smoothing_window < 1 || smoothing_window % 2 == 0) throw ConfigError("smoothing_window must be odd and >= 1");
  if (!(gap_tolerance_factor > 0.0)) throw ConfigError("gap_tolerance_factor must be > 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("noise_sigma must be >= 0");
}

std::vector<Gap> detect_gaps(const AgentTrack& track, double expected_dt, double gap_tolerance_factor) {
  std::vector<Gap> gaps;
  const auto& d = track.detections;
  const double limit = gap_tolerance_factor * expected_dt;
  for (std::size_t k = 1; k < d.size(); ++k)
    if (d[k].time - d[k - 1].time > limit) gaps.push_back({d[k - 1].time, d[k].time});
  return gaps;
}

AgentTrack interpolate_gaps(const AgentTrack& track, double expected_dt, double gap_tolerance_factor) {
  if (!(expected_dt > 0.0)) throw ValidationError("expected_dt must be > 0");
  const auto& in = track.detections;
  AgentTrack out{track.agent_id, track.index, {}};
  out.detections.reserve(in.size());
  const double limit = gap_tolerance_factor * expected_dt;
  for (std::size_t k = 0; k < in.size(); ++k) {
    if (k > 0) {
      const auto& a = in[k - 1];
      const auto& b = in[k];
      const double span = b.time - a.time;
      if (span > limit) {
        const auto inserted = static_cast<long long>(std::llround(span / expected_dt)) - 1;
        const auto slots = static_cast<double>(inserted + 1);
        for (long long j = 1; j <= inserted; ++j) {
          const double s = static_cast<double>(j) / slots;
          Detection d;
          d.agent_id = track.agent_id;
          d.time = a.time + span * s;
          d.position = lerp(a.position, b.position, s);
          d.frame = (b.frame - a.frame == inserted + 1)
                        ? a.frame + j
                        : a.frame + std::llround(static_cast<double>(b.frame - a.frame) * s);
          out.detections.push_back(d);
        }
      }
    }
    out.detections.push_back(in[k]);
  }
  return out;
}

AgentTrack smooth(const AgentTrack& track, int window, SmoothingEdge edge) {
  if (window < 1 || window % 2 == 0) throw ValidationError("smoothing window must be odd and >= 1");
  AgentTrack out = track;
  if (window == 1) return out;
  const auto n = static_cast<long long>(track.size());
  const long long half = window / 2;
  for (long long i = 0; i < n; ++i) {
    long long lo = 0;
    long long hi = 0;
    if (edge == SmoothingEdge::kSymmetric) {
      const long long r = std::min({half, i, n - 1 - i});
      lo = i - r;
      hi = i + r;
    } else {
      lo = std::max(0LL, i - half);
      hi = std::min(n - 1, i + half);
    }
    Vec2 sum = Vec2::Zero();
    for (long long j = lo; j <= hi; ++j) sum += track.detections[static_cast<std::size_t>(j)].position;
    out.detections[static_cast<std::size_t>(i)].position = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

Vec2 noise_draw(std::uint64_t seed, AgentId agent, Frame frame) {
  const std::uint64_t key =
      splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(agent)) ^ static_cast<std::uint64_t>(frame));
  std::mt19937_64 rng(key);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double x = normal(rng);
  const double y = normal(rng);
  return {x, y};
}

AgentTrack inject_noise(const AgentTrack& track, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw ValidationError("noise sigma must be >= 0");
  AgentTrack out = track;
  if (sigma == 0.0) return out;
  for (auto& d : out.detections) d.position += sigma * noise_draw(seed, d.agent_id, d.frame);
  return out;
}

Dataset downsample(const Dataset& dataset, double target_hz) {
  const double source_hz = dataset.frequency_hz;
  if (!(target_hz > 0.0)) throw ValidationError("target frequency must be > 0");
  if (target_hz > source_hz * (1.0 + 1e-12))
    throw ValidationError("cannot downsample " + std::to_string(source_hz) + " Hz to a higher rate " +
                          std::to_string(target_hz) + " Hz");
  const double ratio = source_hz / target_hz;
  const auto k = std::llround(ratio);
  Dataset out;
  out.name = dataset.name;
  out.environment = dataset.environment;
  out.frequency_hz = target_hz;

  if (std::abs(ratio - static_cast<double>(k)) < 1e-9 * ratio) {
    if (k == 1) {
      out = dataset;
      out.frequency_hz = target_hz;
      return out;
    }
    Frame f0 = std::numeric_limits<Frame>::max();
    for (const auto& t : dataset.tracks)
      for (const auto& d : t.detections) f0 = std::min(f0, d.frame);
    for (const auto& t : dataset.tracks) {
      AgentTrack nt{t.agent_id, 0, {}};
      for (const auto& d : t.detections) {
        if ((d.frame - f0) % k != 0) continue;
        Detection nd = d;
        nd.frame = (d.frame - f0) / k;
        nt.detections.push_back(nd);
      }
      out.tracks.push_back(std::move(nt));
    }
    out.reindex();
    return out;
  }

  // Non-integer ratio: uniform target grid anchored at the earliest detection.
  const double t0 = dataset.time_span().first;
  constexpr double eps = 1e-9;
  for (const auto& t : dataset.tracks) {
    AgentTrack nt{t.agent_id, 0, {}};
    const auto& d = t.detections;
    if (d.empty()) continue;
    const auto n_first = static_cast<Frame>(std::ceil((d.front().time - t0) * target_hz - eps));
    const auto n_last = static_cast<Frame>(std::floor((d.back().time - t0) * target_hz + eps));
    std::size_t j = 0;
    for (Frame n = n_first; n <= n_last; ++n) {
      const double time = t0 + static_cast<double>(n) / target_hz;
      while (j + 1 < d.size() && d[j + 1].time <= time) ++j;
      Detection nd;
      nd.agent_id = t.agent_id;
      nd.frame = n;
      nd.time = time;
      if (j + 1 >= d.size() || std::abs(d[j].time - time) <= eps) {
        nd.position = d[j].position;
      } else {
        const double s = (time - d[j].time) / (d[j + 1].time - d[j].time);
        nd.position = lerp(d[j].position, d[j + 1].position, s);
      }
      nt.detections.push_back(nd);
    }
    out.tracks.push_back(std::move(nt));
  }
  out.reindex();
  return out;
}

Dataset preprocess(const Dataset& dataset, const PreprocessConfig& config) {
  config.validate();
  Dataset out = (config.target_hz > 0.0 && config.target_hz != dataset.frequency_hz)
                    ? downsample(dataset, config.target_hz)
                    : dataset;
  const double dt = out.dt();
  for (auto& t : out.tracks) {
    t = interpolate_gaps(t, dt, config.gap_tolerance_factor);
    t = smooth(t, config.smoothing_window, config.smoothing_edge);
    t = inject_noise(t, config.noise_sigma, config.noise_seed);
  }
  return out;
}

}  // namespace trajbench
