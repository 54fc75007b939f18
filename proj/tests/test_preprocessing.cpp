#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "trajbench/error.hpp"
#include "trajbench/preprocessing.hpp"

using namespace trajbench;

namespace {

AgentTrack track_of(std::initializer_list<std::pair<double, Vec2>> points, double hz = 2.5) {
  AgentTrack t{1, 0, {}};
  for (const auto& [time, p] : points) t.detections.push_back({std::llround(time * hz), time, 1, p});
  return t;
}

AgentTrack xs(std::initializer_list<double> values) {
  AgentTrack t{1, 0, {}};
  Frame f = 0;
  for (double x : values) {
    t.detections.push_back({f, f * 0.4, 1, Vec2(x, 0)});
    ++f;
  }
  return t;
}

}  // namespace

TEST(Gaps, SingleGapIsDetected) {
  const auto t = track_of({{0.0, Vec2(0, 0)}, {0.4, Vec2(1, 0)}, {1.2, Vec2(2, 0)}});
  const auto gaps = detect_gaps(t, 0.4, 1.5);
  ASSERT_EQ(gaps.size(), 1u);
  EXPECT_DOUBLE_EQ(gaps[0].start, 0.4);
  EXPECT_DOUBLE_EQ(gaps[0].end, 1.2);
}

TEST(Gaps, UniformTrackHasNone) {
  EXPECT_TRUE(detect_gaps(xs({0, 1, 2, 3, 4}), 0.4, 1.5).empty());
}

TEST(Gaps, TwoGapsInTimeOrder) {
  const auto t = track_of({{0.0, Vec2(0, 0)}, {1.2, Vec2(1, 0)}, {1.6, Vec2(2, 0)}, {3.2, Vec2(3, 0)}});
  const auto gaps = detect_gaps(t, 0.4, 1.5);
  ASSERT_EQ(gaps.size(), 2u);
  EXPECT_DOUBLE_EQ(gaps[0].start, 0.0);
  EXPECT_DOUBLE_EQ(gaps[0].end, 1.2);
  EXPECT_DOUBLE_EQ(gaps[1].start, 1.6);
  EXPECT_DOUBLE_EQ(gaps[1].end, 3.2);
}

TEST(Interpolation, MidpointIsInserted) {
  const auto out = interpolate_gaps(track_of({{0.0, Vec2(0, 0)}, {0.8, Vec2(0.8, 0)}}), 0.4);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_NEAR(out.detections[1].time, 0.4, 1e-12);
  EXPECT_NEAR((out.detections[1].position - Vec2(0.4, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(out.detections[1].frame, 1);
}

TEST(Interpolation, TwoPointsLinearInTime) {
  const auto out = interpolate_gaps(track_of({{0.0, Vec2(0, 0)}, {1.2, Vec2(0, 1.2)}}), 0.4);
  ASSERT_EQ(out.size(), 4u);
  EXPECT_NEAR((out.detections[1].position - Vec2(0, 0.4)).norm(), 0.0, 1e-12);
  EXPECT_NEAR((out.detections[2].position - Vec2(0, 0.8)).norm(), 0.0, 1e-12);
  EXPECT_NEAR(out.detections[2].time, 0.8, 1e-12);
}

TEST(Interpolation, GapFreeTrackIsUnchanged) {
  const auto t = xs({0, 1, 5, 2});
  const auto out = interpolate_gaps(t, 0.4);
  EXPECT_EQ(out.detections, t.detections);
}

TEST(Interpolation, InsertsRoundedGapCountProperty) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> missing(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = missing(rng);
    const double span = 0.4 * (m + 1);
    const auto t = track_of({{0.0, Vec2(0, 0)}, {span, Vec2(3, 1)}});
    EXPECT_EQ(interpolate_gaps(t, 0.4).size(), static_cast<std::size_t>(std::lround(span / 0.4) + 1));
  }
}

TEST(Smoothing, WindowOneIsIdentity) {
  const auto t = xs({0, 3, 0, 7});
  EXPECT_EQ(smooth(t, 1).detections, t.detections);
}

TEST(Smoothing, TruncatedEdgesAverageAvailableNeighbours) {
  const auto out = smooth(xs({0, 3, 0}), 3, SmoothingEdge::kTruncated);
  EXPECT_DOUBLE_EQ(out.detections[0].position.x(), 1.5);
  EXPECT_DOUBLE_EQ(out.detections[1].position.x(), 1.0);
  EXPECT_DOUBLE_EQ(out.detections[2].position.x(), 1.5);
}

TEST(Smoothing, SymmetricEdgesShrinkToRadiusZero) {
  const auto out = smooth(xs({0, 3, 0}), 3, SmoothingEdge::kSymmetric);
  EXPECT_DOUBLE_EQ(out.detections[0].position.x(), 0.0);
  EXPECT_DOUBLE_EQ(out.detections[1].position.x(), 1.0);
  EXPECT_DOUBLE_EQ(out.detections[2].position.x(), 0.0);
}

TEST(Smoothing, SymmetricWindowFiveOracle) {
  const std::vector<double> x{1, 4, 2, 8, 5, 7};
  const auto out = smooth(xs({1, 4, 2, 8, 5, 7}), 5);
  // radius per index: 0, 1, 2, 2, 1, 0
  const std::vector<double> expect{1, (1 + 4 + 2) / 3.0, (1 + 4 + 2 + 8 + 5) / 5.0, (4 + 2 + 8 + 5 + 7) / 5.0,
                                   (8 + 5 + 7) / 3.0, 7};
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(out.detections[i].position.x(), expect[i], 1e-12);
}

TEST(Smoothing, ConstantTrackUnchangedAndTimesKept) {
  const auto t = xs({2, 2, 2, 2, 2});
  const auto out = smooth(t, 5);
  for (std::size_t i = 0; i < t.size(); ++i) {
    EXPECT_EQ(out.detections[i].position, t.detections[i].position);
    EXPECT_EQ(out.detections[i].time, t.detections[i].time);
  }
}

TEST(Smoothing, EvenWindowIsRejected) { EXPECT_THROW(smooth(xs({1, 2}), 4), ValidationError); }

TEST(Smoothing, StaysInsideWindowBoundingBoxProperty) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    AgentTrack t{1, 0, {}};
    for (Frame f = 0; f < 25; ++f) t.detections.push_back({f, f * 0.4, 1, Vec2(n(rng), n(rng))});
    for (auto edge : {SmoothingEdge::kSymmetric, SmoothingEdge::kTruncated}) {
      const int window = 5;
      const auto out = smooth(t, window, edge);
      for (std::size_t i = 0; i < t.size(); ++i) {
        const std::size_t lo = i >= 2 ? i - 2 : 0;
        const std::size_t hi = std::min(t.size() - 1, i + 2);
        Vec2 mn = t.detections[lo].position;
        Vec2 mx = mn;
        for (std::size_t j = lo; j <= hi; ++j) {
          mn = mn.cwiseMin(t.detections[j].position);
          mx = mx.cwiseMax(t.detections[j].position);
        }
        const auto& p = out.detections[i].position;
        EXPECT_TRUE((p.array() >= mn.array() - 1e-12).all() && (p.array() <= mx.array() + 1e-12).all());
      }
    }
  }
}

TEST(Noise, ZeroSigmaIsIdentity) {
  const auto t = xs({0, 1, 2});
  EXPECT_EQ(inject_noise(t, 0.0, 99).detections, t.detections);
}

TEST(Noise, DeterministicForSameSeed) {
  const auto t = xs({0, 1, 2, 3});
  EXPECT_EQ(inject_noise(t, 0.3, 5).detections, inject_noise(t, 0.3, 5).detections);
  EXPECT_NE(inject_noise(t, 0.3, 5).detections, inject_noise(t, 0.3, 6).detections);
}

TEST(Noise, DrawsAreKeyedByAgentAndFrame) {
  AgentTrack a{1, 0, {{3, 1.2, 1, Vec2(0, 0)}, {4, 1.6, 1, Vec2(0, 0)}}};
  AgentTrack b{1, 0, {{4, 1.6, 1, Vec2(0, 0)}}};
  // Frame 4 receives the same perturbation whether or not frame 3 exists.
  EXPECT_EQ(inject_noise(a, 0.2, 1).detections[1].position, inject_noise(b, 0.2, 1).detections[0].position);
}

TEST(Noise, SampleStdMatchesSigma) {
  AgentTrack t{7, 0, {}};
  for (Frame f = 0; f < 10000; ++f) t.detections.push_back({f, f * 0.4, 7, Vec2(1, -2)});
  const auto out = inject_noise(t, 0.1, 2024);
  for (int axis = 0; axis < 2; ++axis) {
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double d = out.detections[i].position[axis] - t.detections[i].position[axis];
      sum += d;
      sq += d * d;
    }
    const double n = static_cast<double>(t.size());
    const double std = std::sqrt(sq / n - (sum / n) * (sum / n));
    EXPECT_GE(std, 0.095);
    EXPECT_LE(std, 0.105);
  }
}

TEST(Downsample, IntegerRatioDecimates) {
  std::vector<Detection> dets;
  for (Frame f = 0; f < 20; ++f) dets.push_back({f, f * 0.1, 1, Vec2(f, 0)});
  const auto d = downsample(assemble_dataset(dets, 10.0, "x"), 2.5);
  EXPECT_EQ(d.frequency_hz, 2.5);
  ASSERT_EQ(d.tracks[0].size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(d.tracks[0].detections[k].frame, static_cast<Frame>(k));
    EXPECT_EQ(d.tracks[0].detections[k].position.x(), 4.0 * k);
  }
}

TEST(Downsample, SameRateIsIdentity) {
  std::vector<Detection> dets;
  for (Frame f = 0; f < 6; ++f) dets.push_back({f, f * 0.4, 2, Vec2(f, f)});
  const auto src = assemble_dataset(dets, 2.5, "x");
  const auto d = downsample(src, 2.5);
  EXPECT_EQ(d.tracks[0].detections, src.tracks[0].detections);
}

TEST(Downsample, NonIntegerRatioInterpolates) {
  // 6 Hz samples x = k^2 at t = k / 6.
  std::vector<Detection> dets;
  for (Frame k = 0; k < 4; ++k) dets.push_back({k, k / 6.0, 1, Vec2(k * k, 0)});
  const auto d = downsample(assemble_dataset(dets, 6.0, "x"), 2.5);
  ASSERT_EQ(d.tracks[0].size(), 2u);
  // t = 0.4 lies between t = 2/6 (x = 4) and t = 3/6 (x = 9).
  const double s = (0.4 - 2.0 / 6.0) / (1.0 / 6.0);
  EXPECT_NEAR(d.tracks[0].detections[1].position.x(), 4.0 + s * 5.0, 1e-12);
  EXPECT_NEAR(d.tracks[0].detections[1].time, 0.4, 1e-12);
  EXPECT_EQ(d.tracks[0].detections[1].frame, 1);
}

TEST(Downsample, UpsamplingIsRejected) {
  std::vector<Detection> dets{{0, 0.0, 1, Vec2(0, 0)}, {1, 0.4, 1, Vec2(1, 0)}};
  EXPECT_THROW(downsample(assemble_dataset(dets, 2.5, "x"), 10.0), ValidationError);
}

TEST(Pipeline, IdempotentOnLinearTracksWithoutNoise) {
  std::vector<Detection> dets;
  trajbench::testing::add_linear_track(dets, 1, 0, 30, Vec2(0, 0), Vec2(1.1, 0.3), 10.0);
  trajbench::testing::add_linear_track(dets, 2, 5, 40, Vec2(4, 2), Vec2(-0.4, 0.9), 10.0);
  dets.erase(dets.begin() + 10, dets.begin() + 13);  // a gap in agent 1
  PreprocessConfig cfg;
  cfg.target_hz = 2.5;
  const auto once = preprocess(assemble_dataset(dets, 10.0, "x"), cfg);
  const auto twice = preprocess(once, cfg);
  ASSERT_EQ(once.tracks.size(), twice.tracks.size());
  for (std::size_t i = 0; i < once.tracks.size(); ++i) {
    ASSERT_EQ(once.tracks[i].size(), twice.tracks[i].size());
    for (std::size_t k = 0; k < once.tracks[i].size(); ++k)
      EXPECT_NEAR((once.tracks[i].detections[k].position - twice.tracks[i].detections[k].position).norm(), 0.0,
                  1e-12);
  }
}

TEST(Pipeline, InvalidConfigIsRejected) {
  PreprocessConfig cfg;
  cfg.smoothing_window = 2;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.smoothing_window = 3;
  cfg.noise_sigma = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
