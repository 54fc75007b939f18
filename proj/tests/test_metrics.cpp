#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "trajbench/error.hpp"
#include "trajbench/metrics.hpp"
#include "trajbench/report.hpp"

using namespace trajbench;

namespace {

Path random_path(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g(0.0, 3.0);
  Path p;
  for (std::size_t i = 0; i < n; ++i) p.emplace_back(g(rng), g(rng));
  return p;
}

// Plain loops over raw doubles, no Eigen.
double oracle_ade(const Path& a, const Path& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dx = a[i][0] - b[i][0], dy = a[i][1] - b[i][1];
    s += std::sqrt(dx * dx + dy * dy);
  }
  return s / a.size();
}

double oracle_density(double mx, double my, double sxx, double sxy, double syy, double x, double y) {
  const double det = sxx * syy - sxy * sxy;
  const double dx = x - mx, dy = y - my;
  const double q = (syy * dx * dx - 2 * sxy * dx * dy + sxx * dy * dy) / det;
  return std::exp(-0.5 * q) / (2 * std::numbers::pi * std::sqrt(det));
}

GaussianMixtureSequence single_gaussian(const Path& means) {
  GaussianMixtureSequence m;
  m.weights = {1.0};
  m.modes.emplace_back();
  for (const auto& mu : means) m.modes[0].push_back({mu, Mat2::Identity()});
  return m;
}

}  // namespace

TEST(Displacement, AdeFdeExamples) {
  const Path gt{Vec2(0, 0), Vec2(1, 0), Vec2(2, 0)};
  const Path pred{Vec2(0, 1), Vec2(1, 1), Vec2(2, 3)};
  EXPECT_DOUBLE_EQ(ade(pred, gt), 5.0 / 3.0);
  EXPECT_DOUBLE_EQ(fde(pred, gt), 3.0);
  EXPECT_EQ(ade(gt, gt), 0.0);
  EXPECT_THROW(ade(Path{Vec2(0, 0)}, gt), ValidationError);
  EXPECT_THROW(fde(Path{}, Path{}), ValidationError);
}

TEST(Displacement, TopKPicksTheBestSample) {
  const Path gt{Vec2(0, 0), Vec2(1, 0)};
  const SampleSet s{{Path{Vec2(5, 5), Vec2(5, 5)}, Path{Vec2(0, 0.1), Vec2(1, 0.1)}, Path{Vec2(0, 0), Vec2(9, 0)}}};
  EXPECT_DOUBLE_EQ(top_k_ade(s, gt), 0.1);
  EXPECT_DOUBLE_EQ(top_k_fde(s, gt), 0.1);
  EXPECT_THROW(top_k_ade(SampleSet{}, gt), ValidationError);
}

TEST(Displacement, RandomPairsMatchOracle) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + trial % 20;
    const Path gt = random_path(rng, n);
    SampleSet set;
    for (int k = 0; k < 1 + trial % 5; ++k) set.samples.push_back(random_path(rng, n));
    double best_ade = 1e300, best_fde = 1e300;
    for (const auto& s : set.samples) {
      best_ade = std::min(best_ade, oracle_ade(s, gt));
      best_fde = std::min(best_fde, std::hypot(s.back()[0] - gt.back()[0], s.back()[1] - gt.back()[1]));
    }
    EXPECT_NEAR(ade(set.samples[0], gt), oracle_ade(set.samples[0], gt), 1e-12);
    EXPECT_NEAR(top_k_ade(set, gt), best_ade, 1e-12);
    EXPECT_NEAR(top_k_fde(set, gt), best_fde, 1e-12);
  }
}

TEST(Nlp, UnitGaussianAtTheMeanIsLogTwoPi) {
  const Path gt{Vec2(1, 2), Vec2(3, 4), Vec2(-1, 0)};
  EXPECT_NEAR(nlp(single_gaussian(gt), gt), std::log(2 * std::numbers::pi), 1e-12);
  EXPECT_NEAR(std::log(2 * std::numbers::pi), 1.837877, 1e-6);
}

TEST(Nlp, IdenticalModesCollapse) {
  const Path gt{Vec2(0, 0), Vec2(1, 1)};
  const Path means{Vec2(0.3, 0), Vec2(1, 0.6)};
  auto one = single_gaussian(means);
  auto two = one;
  two.weights = {0.5, 0.5};
  two.modes.push_back(two.modes[0]);
  EXPECT_NEAR(nlp(two, gt), nlp(one, gt), 1e-12);
}

TEST(Nlp, RandomMixturesMatchDirectDensity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t steps = 1 + trial % 12;
    GaussianMixtureSequence m;
    double total = 0.0;
    for (int k = 0; k < 3; ++k) {
      m.weights.push_back(u(rng));
      total += m.weights.back();
      m.modes.emplace_back();
      for (std::size_t t = 0; t < steps; ++t) {
        const double sx = u(rng) + 0.1, sy = u(rng) + 0.1, rho = 0.9 * (2 * u(rng) - 1);
        Mat2 c;
        c << sx * sx, rho * sx * sy, rho * sx * sy, sy * sy;
        m.modes.back().push_back({Vec2(g(rng), g(rng)), c});
      }
    }
    for (auto& w : m.weights) w /= total;
    const Path gt = random_path(rng, steps);
    double expected = 0.0;
    for (std::size_t t = 0; t < steps; ++t) {
      double p = 0.0;
      for (int k = 0; k < 3; ++k) {
        const auto& gk = m.modes[k][t];
        p += m.weights[k] * oracle_density(gk.mean[0], gk.mean[1], gk.covariance(0, 0), gk.covariance(0, 1),
                                           gk.covariance(1, 1), gt[t][0], gt[t][1]);
      }
      expected += -std::log(std::max(p, 1e-12));
    }
    expected /= steps;
    EXPECT_NEAR(nlp(m, gt), expected, 1e-9);
  }
}

TEST(Nlp, GridDensityIsMassOverArea) {
  ProbabilityGrid grid;
  grid.origin = Vec2(-1, -1);
  grid.resolution = 0.5;
  grid.width = 4;
  grid.height = 4;
  grid.mass.assign(16, 0.0);
  grid.mass[1 * 4 + 2] = 0.75;  // ix 2, iy 1 -> [0, 0.5) x [-0.5, 0)
  grid.mass[0] = 0.25;
  EXPECT_DOUBLE_EQ(grid_density(grid, Vec2(0.1, -0.2)), 3.0);
  EXPECT_EQ(grid_density(grid, Vec2(5, 5)), 0.0);
  const GridSequence seq{{grid}};
  EXPECT_NEAR(nlp(seq, Path{Vec2(0.1, -0.2)}), -std::log(3.0), 1e-12);
  // outside the support the floor applies
  EXPECT_NEAR(nlp(seq, Path{Vec2(9, 9)}), -std::log(1e-12), 1e-9);
  const auto score = score_forecast(1, seq, Path{Vec2(0.25, -0.25)});
  EXPECT_NEAR(score.ade, 0.0, 1e-12);  // arg-max cell centre
  ASSERT_TRUE(score.nlp);
}

TEST(Scoring, PointsAreSingleSampleAndMixtureUsesHeaviestMode) {
  const Path gt{Vec2(0, 0), Vec2(1, 0)};
  const auto p = score_forecast(3, PointSequence{{Vec2(0, 1), Vec2(1, 2)}}, gt);
  EXPECT_DOUBLE_EQ(p.ade, 1.5);
  EXPECT_DOUBLE_EQ(p.fde, 2.0);
  EXPECT_FALSE(p.nlp);
  GaussianMixtureSequence m = single_gaussian(Path{Vec2(9, 9), Vec2(9, 9)});
  m.modes.push_back(single_gaussian(gt).modes[0]);
  m.weights = {0.3, 0.7};
  const auto s = score_forecast(3, m, gt);
  EXPECT_EQ(s.ade, 0.0);
  ASSERT_TRUE(s.nlp);
}

TEST(Scoring, ScenarioSkipsContextAgentsAndNeedsTargets) {
  Scenario sc;
  sc.prediction_frames = 1;
  sc.agents.push_back({1, {Vec2(0, 0)}, {Vec2(1, 0)}, true});
  sc.agents.push_back({2, {Vec2(5, 5)}, {}, false});
  Prediction pred;
  pred.agents.push_back({1, PointSequence{{Vec2(1, 1)}}});
  const auto scores = score_scenario(sc, pred);
  ASSERT_EQ(scores.size(), 1u);
  const auto sum = summarize(sc, scores);
  EXPECT_EQ(sum.agents, 2u);
  EXPECT_EQ(sum.targets, 1u);
  EXPECT_DOUBLE_EQ(sum.ade, 1.0);
  EXPECT_THROW(score_scenario(sc, Prediction{}), ValidationError);
}

TEST(Validation, RepresentationInvariants) {
  EXPECT_NO_THROW(validate_forecast(PointSequence{{Vec2(0, 0)}}, 1));
  EXPECT_THROW(validate_forecast(PointSequence{{Vec2(0, 0)}}, 2), ValidationError);
  EXPECT_THROW(validate_forecast(SampleSet{}, 1), ValidationError);
  auto m = single_gaussian(Path{Vec2(0, 0)});
  m.weights = {0.8};
  EXPECT_THROW(validate_forecast(m, 1), ValidationError);
  m.weights = {1.0};
  m.modes[0][0].covariance << 1, 0.5, 0.4, 1;
  EXPECT_THROW(validate_forecast(m, 1), ValidationError);
  ProbabilityGrid g;
  g.width = g.height = 1;
  g.mass = {0.9};
  EXPECT_THROW(validate_forecast(GridSequence{{g}}, 1), ValidationError);
  g.mass = {1.0 + 5e-7};
  EXPECT_NO_THROW(validate_forecast(GridSequence{{g}}, 1));
}

TEST(Report, PopulationStatisticsAndCsv) {
  const auto s = summarize_values({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
  EXPECT_EQ(s.count, 4u);
  const auto cells = aggregate("ade", "T_s", {{"1.6", 1.0}, {"3.2", 2.0}, {"1.6", 3.0}});
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].group, "1.6");
  EXPECT_DOUBLE_EQ(cells[0].mean, 2.0);
  EXPECT_EQ(cells[1].count, 1u);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}
