#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "trajbench/calibration.hpp"
#include "trajbench/error.hpp"
#include "trajbench/preprocessing.hpp"
#include "trajbench/synthetic.hpp"

using namespace trajbench;

namespace {

ParamSpace box(std::initializer_list<const char*> names) {
  ParamSpace s;
  for (const char* n : names) s.dims.push_back({n, -2.0, 2.0, ParamScale::kLinear});
  return s;
}

double bowl(const ParamSet& p) {
  const double x = p.at("x") - 0.7;
  const double y = p.at("y") + 1.1;
  return x * x + 3 * y * y;
}

Dataset noisy_crossing() {
  auto d = synthetic_crowd(SyntheticKind::kCrossing, 6, 12.0, 2);
  for (auto& t : d.tracks) t = inject_noise(t, 0.1, 17);
  return d;
}

}  // namespace

TEST(Minimize, BudgetOneReturnsDefaults) {
  const ParamSet defaults{{"x", 0.0}, {"y", 0.0}};
  const auto r = minimize(bowl, box({"x", "y"}), defaults, {.budget = 1});
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.best_params, defaults);
  EXPECT_DOUBLE_EQ(r.best_value, bowl(defaults));
}

TEST(Minimize, IncumbentNonIncreasingAndWithinBounds) {
  const auto space = box({"x", "y"});
  const auto r = minimize(bowl, space, {{"x", 0.0}, {"y", 0.0}}, {.budget = 120, .seed = 4});
  ASSERT_EQ(r.trace.size(), 120u);
  double incumbent = r.trace.front().value;
  double best_seen = incumbent;
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    EXPECT_EQ(r.trace[i].index, i);
    EXPECT_TRUE(space.contains(r.trace[i].params));
    best_seen = std::min(best_seen, r.trace[i].value);
    EXPECT_LE(best_seen, incumbent);
    incumbent = best_seen;
  }
  EXPECT_EQ(r.best_value, best_seen);
  EXPECT_LT(r.best_value, 0.01);
}

TEST(Minimize, SameSeedSameTrace) {
  const ParamSet defaults{{"x", 0.0}, {"y", 0.0}};
  const auto a = minimize(bowl, box({"x", "y"}), defaults, {.budget = 40, .seed = 9});
  const auto b = minimize(bowl, box({"x", "y"}), defaults, {.budget = 40, .seed = 9});
  const auto c = minimize(bowl, box({"x", "y"}), defaults, {.budget = 40, .seed = 10});
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].params, b.trace[i].params);
    EXPECT_EQ(a.trace[i].value, b.trace[i].value);
  }
  EXPECT_NE(a.trace[1].params, c.trace[1].params);
}

TEST(Minimize, LogScaleStaysPositive) {
  ParamSpace s;
  s.dims.push_back({"x", 1e-3, 10.0, ParamScale::kLog});
  const auto r = minimize([](const ParamSet& p) { return std::abs(std::log(p.at("x"))); }, s, {{"x", 5.0}},
                          {.budget = 60, .seed = 2});
  for (const auto& t : r.trace) {
    EXPECT_GE(t.params.at("x"), 1e-3);
    EXPECT_LE(t.params.at("x"), 10.0);
  }
  EXPECT_LT(r.best_value, 0.1);
}

TEST(Minimize, RejectsBadInput) {
  EXPECT_THROW(minimize(bowl, ParamSpace{}, {}, {}), ValidationError);
  EXPECT_THROW(minimize(bowl, box({"x", "y"}), {{"x", 5.0}, {"y", 0.0}}, {}), ValidationError);
  EXPECT_THROW(minimize(bowl, box({"x", "y"}), {{"x", 0.0}, {"y", 0.0}}, {.budget = 0}), ValidationError);
  ParamSpace inverted;
  inverted.dims.push_back({"x", 1.0, 0.0, ParamScale::kLinear});
  EXPECT_THROW(inverted.validate(), ValidationError);
}

TEST(Minimize, TraceCsvCarriesIncumbent) {
  const auto r = minimize(bowl, box({"x", "y"}), {{"x", 0.0}, {"y", 0.0}}, {.budget = 5, .seed = 1});
  const auto csv = r.trace_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,value,incumbent,elapsed_s,x,y");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST(Spaces, DefaultsLieInsideTheirSpaces) {
  EXPECT_TRUE(ParamSpace::for_predictor("cvm").dims.empty());
  EXPECT_TRUE(ParamSpace::for_predictor("sof").contains(SofParams{}.to_params()));
  EXPECT_TRUE(ParamSpace::for_predictor("kara").contains(KaraParams{}.to_params()));
  EXPECT_EQ(ParamSpace::for_predictor("kara").dims.size(), 8u);
}

TEST(Split, TimeRuleSeparatesSubsets) {
  std::vector<Detection> dets;
  trajbench::testing::add_linear_track(dets, 1, 0, 9, Vec2(0, 0), Vec2(1, 0), 1.0);
  trajbench::testing::add_linear_track(dets, 2, 6, 9, Vec2(0, 0), Vec2(1, 0), 1.0);
  const auto d = assemble_dataset(dets, 1.0, "s");
  const auto [calib, hold] = split_calibration(d, 0.5);  // boundary t = 4.5
  EXPECT_EQ(calib.detection_count() + hold.detection_count(), d.detection_count());
  for (const auto& t : calib.tracks)
    for (const auto& det : t.detections) EXPECT_LT(det.time, 4.5);
  for (const auto& t : hold.tracks)
    for (const auto& det : t.detections) EXPECT_GE(det.time, 4.5);
  EXPECT_EQ(calib.tracks.size(), 1u);
  EXPECT_EQ(hold.tracks.size(), 2u);
  EXPECT_THROW(split_calibration(d, 1.0), ValidationError);
}

TEST(Calibrate, SofOnNoisyCrossingDoesNotLoseToDefaults) {
  const auto d = noisy_crossing();
  const auto space = ParamSpace::for_predictor("sof");
  const auto r = calibrate("sof", space, d, ScenarioSpec{}, {.budget = 20, .seed = 3});
  ASSERT_EQ(r.trace.size(), 20u);
  EXPECT_EQ(r.trace.front().params, SofParams{}.to_params());
  EXPECT_LE(r.best_value, r.trace.front().value);
  EXPECT_TRUE(space.contains(r.best_params));
}

TEST(Calibrate, EmptyScenarioSetIsAnError) {
  std::vector<Detection> dets;
  trajbench::testing::add_linear_track(dets, 1, 0, 5, Vec2(0, 0), Vec2(1, 0), 2.5);
  EXPECT_THROW(calibrate("sof", ParamSpace::for_predictor("sof"), assemble_dataset(dets, 2.5, "tiny"), ScenarioSpec{},
                         {.budget = 2}),
               Error);
}
