#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <Eigen/Geometry>
#include <random>

#include "trajbench/error.hpp"
#include "trajbench/metrics.hpp"
#include "trajbench/predictors.hpp"
#include "trajbench/synthetic.hpp"

using namespace trajbench;

namespace {

const Path& points_of(const Prediction& p, AgentId id) { return std::get<PointSequence>(*p.find(id)).points; }

Scenario single_agent(const Vec2& start, const Vec2& v, int obs = 8, int pred = 12, double dt = 0.4) {
  Scenario s;
  s.dt = dt;
  s.anchor = obs - 1;
  s.prediction_frames = pred;
  ScenarioAgent a;
  a.agent_id = 1;
  a.is_target = true;
  for (int k = 0; k < obs; ++k) a.observed.push_back(start + v * (k * dt));
  for (int k = 1; k <= pred; ++k) a.future_gt.push_back(a.observed.back() + v * (k * dt));
  s.agents.push_back(a);
  return s;
}

Scenario transformed(const Scenario& s, double angle, const Vec2& shift) {
  const Mat2 r = Eigen::Rotation2Dd(angle).toRotationMatrix();
  Scenario out = s;
  for (auto& a : out.agents) {
    for (auto& p : a.observed) p = r * p + shift;
    for (auto& p : a.future_gt) p = r * p + shift;
  }
  return out;
}

double min_distance(const Path& a, const Path& b) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.size(); ++k) m = std::min(m, (a[k] - b[k]).norm());
  return m;
}

double max_waypoint_gap(const Prediction& a, const Prediction& b) {
  double m = 0.0;
  for (const auto& af : a.agents) {
    const auto& pa = std::get<PointSequence>(af.forecast).points;
    const auto& pb = points_of(b, af.agent_id);
    for (std::size_t k = 0; k < pa.size(); ++k) m = std::max(m, (pa[k] - pb[k]).norm());
  }
  return m;
}

Scenario random_crowd(std::uint64_t seed, int agents) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-6.0, 6.0);
  std::uniform_real_distribution<double> heading(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> speed(0.6, 1.6);
  Scenario s;
  s.dt = 0.4;
  s.anchor = 7;
  s.prediction_frames = 12;
  for (int i = 0; i < agents; ++i) {
    const Vec2 start(pos(rng), pos(rng));
    const double h = heading(rng);
    const Vec2 v = speed(rng) * Vec2(std::cos(h), std::sin(h));
    auto one = single_agent(start, v);
    one.agents[0].agent_id = i + 1;
    s.agents.push_back(one.agents[0]);
  }
  return s;
}

}  // namespace

TEST(VelocityFilter, WeightsMatchGaussianOracle) {
  const auto w = VelocityFilter{VelocityMode::kGaussian, 1.5}.weights(7);
  ASSERT_EQ(w.size(), 7u);
  double norm = 0.0;
  for (int t = 1; t <= 7; ++t) norm += std::exp(-t * t / 4.5);
  for (int t = 1; t <= 7; ++t) EXPECT_NEAR(w[t - 1], std::exp(-t * t / 4.5) / norm, 1e-12);
}

TEST(VelocityFilter, ImpulseInLastDifferenceGivesFirstWeight) {
  // positions: stationary until the last step moves by dt * (1, 0)
  Path obs(8, Vec2(0, 0));
  obs.back() = Vec2(0.4, 0);
  const Vec2 v = estimate_velocity(obs, 0.4);
  EXPECT_NEAR(v.x(), 0.5803, 5e-4);
  double norm = 0.0;
  for (int t = 1; t <= 7; ++t) norm += std::exp(-t * t / 4.5);
  EXPECT_NEAR(v.x(), std::exp(-1 / 4.5) / norm, 1e-12);
  EXPECT_NEAR(v.y(), 0.0, 1e-15);
}

TEST(VelocityFilter, ConstantVelocityRecoveredExactly) {
  Path obs;
  for (int k = 0; k < 8; ++k) obs.push_back(Vec2(0.4 * k, 0));
  const Vec2 v = estimate_velocity(obs, 0.4);
  EXPECT_NEAR((v - Vec2(1, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(estimate_velocity(Path(8, Vec2(3, 3)), 0.4), Vec2(0, 0));
}

TEST(VelocityFilter, LastDifferenceMode) {
  const Path obs{Vec2(0, 0), Vec2(5, 5), Vec2(5.4, 5.8)};
  const Vec2 v = estimate_velocity(obs, 0.4, {VelocityMode::kLastDifference, 1.5});
  EXPECT_NEAR((v - Vec2(1, 2)).norm(), 0.0, 1e-12);
}

TEST(GoalProjection, Examples) {
  EXPECT_EQ(project_goal(Vec2(0, 0), Vec2(1, 0), 0.4), Vec2(16, 0));
  EXPECT_EQ(project_goal(Vec2(2, 3), Vec2(0, 0), 0.4), Vec2(2, 3));
  EXPECT_EQ(project_goal(Vec2(1, 1), Vec2(0, -0.5), 0.4), Vec2(1, -7));
}

TEST(Cvm, StraightLineContinuation) {
  const auto s = single_agent(Vec2(-2.8, 0), Vec2(1, 0));
  const auto prediction = predict_cvm(s);
  const auto& p = points_of(prediction, 1);
  ASSERT_EQ(p.size(), 12u);
  for (int k = 1; k <= 12; ++k) EXPECT_NEAR((p[k - 1] - (s.agents[0].observed.back() + Vec2(0.4 * k, 0))).norm(), 0.0, 1e-12);
  EXPECT_NEAR(ade(p, s.agents[0].future_gt), 0.0, 1e-12);
}

TEST(Cvm, StationaryAgentStays) {
  const auto s = single_agent(Vec2(1, 2), Vec2(0, 0));
  const auto prediction = predict_cvm(s);
  for (const auto& q : points_of(prediction, 1)) EXPECT_EQ(q, Vec2(1, 2));
}

TEST(Cvm, QuarterCircleFdeMatchesChordOracle) {
  // Unit speed on a radius-2 circle, sampled at 2.5 Hz; last-difference CVM.
  const double r = 2.0;
  const double dt = 0.4;
  const double omega = 1.0 / r;
  auto arc = [&](double t) { return Vec2(r * std::cos(omega * t), r * std::sin(omega * t)); };
  Scenario s;
  s.dt = dt;
  s.prediction_frames = 12;
  ScenarioAgent a;
  a.agent_id = 1;
  a.is_target = true;
  for (int k = 0; k < 8; ++k) a.observed.push_back(arc(k * dt));
  for (int k = 8; k < 20; ++k) a.future_gt.push_back(arc(k * dt));
  s.agents.push_back(a);
  const auto p = predict_cvm(s, {VelocityMode::kLastDifference, 1.5});
  const auto score = score_forecast(1, *p.find(1), s.agents[0].future_gt);
  // chord velocity (p7 - p6) / dt extrapolated 12 steps vs the arc at t = 19 dt
  const double x7 = r * std::cos(omega * 7 * dt), y7 = r * std::sin(omega * 7 * dt);
  const double x6 = r * std::cos(omega * 6 * dt), y6 = r * std::sin(omega * 6 * dt);
  const double px = x7 + 12 * (x7 - x6), py = y7 + 12 * (y7 - y6);
  const double gx = r * std::cos(omega * 19 * dt), gy = r * std::sin(omega * 19 * dt);
  EXPECT_NEAR(score.fde, std::hypot(px - gx, py - gy), 1e-12);
  EXPECT_GT(score.fde, 0.5);
}

TEST(ForceModels, SingleAgentReducesToCvm) {
  for (const Vec2& v : {Vec2(1, 0), Vec2(-0.3, 1.4), Vec2(0, 0)}) {
    const auto s = single_agent(Vec2(3, -1), v);
    const auto cvm = predict_cvm(s);
    EXPECT_LT(max_waypoint_gap(predict_social_force(s, {}), cvm), 1e-6);
    EXPECT_LT(max_waypoint_gap(predict_karamouzas(s, {}), cvm), 1e-6);
  }
}

TEST(ForceModels, DistantAgentsBarelyInteract) {
  auto s = single_agent(Vec2(0, 0), Vec2(1, 0));
  auto far = single_agent(Vec2(0, 30), Vec2(-1, 0));
  far.agents[0].agent_id = 2;
  s.agents.push_back(far.agents[0]);
  SofParams p;
  p.b = 0.5;
  const auto both = predict_social_force(s, p);
  const auto alone_a = predict_social_force(single_agent(Vec2(0, 0), Vec2(1, 0)), p);
  for (std::size_t k = 0; k < 12; ++k) EXPECT_LT((points_of(both, 1)[k] - points_of(alone_a, 1)[k]).norm(), 1e-3);
}

TEST(ForceModels, OpposingAgentsKeepMoreDistanceThanCvm) {
  const auto s = generate_synthetic(SyntheticKind::kOpposing);
  const auto cvm = predict_cvm(s);
  const auto sof = predict_social_force(s, {});
  const auto kara = predict_karamouzas(s, {});
  const double d_cvm = min_distance(points_of(cvm, 1), points_of(cvm, 2));
  const double d_sof = min_distance(points_of(sof, 1), points_of(sof, 2));
  const double d_kara = min_distance(points_of(kara, 1), points_of(kara, 2));
  EXPECT_NEAR(d_cvm, 0.2, 1e-9);
  EXPECT_GT(d_sof, d_cvm);
  EXPECT_GT(d_kara, d_cvm);
}

TEST(ForceModels, HalvingSubstepMovesLessThanFiveCentimetres) {
  for (auto kind : {SyntheticKind::kOpposing, SyntheticKind::kCrossing, SyntheticKind::kChasing}) {
    const auto s = generate_synthetic(kind);
    SofParams coarse;
    SofParams fine;
    fine.sub_dt = coarse.sub_dt / 2;
    EXPECT_LT(max_waypoint_gap(predict_social_force(s, coarse), predict_social_force(s, fine)), 0.05);
    KaraParams kc;
    KaraParams kf;
    kf.base.sub_dt = kc.base.sub_dt / 2;
    EXPECT_LT(max_waypoint_gap(predict_karamouzas(s, kc), predict_karamouzas(s, kf)), 0.05);
  }
}

TEST(ForceModels, RigidTransformEquivariance) {
  const auto scenarios = {generate_synthetic(SyntheticKind::kOpposing), generate_synthetic(SyntheticKind::kCrossing),
                          random_crowd(5, 8)};
  for (const auto& s : scenarios) {
    const double angle = 0.83;
    const Vec2 shift(12.5, -4.25);
    const Mat2 r = Eigen::Rotation2Dd(angle).toRotationMatrix();
    const auto st = transformed(s, angle, shift);
    for (int model = 0; model < 2; ++model) {
      const auto base = model == 0 ? predict_social_force(s, {}) : predict_karamouzas(s, {});
      const auto moved = model == 0 ? predict_social_force(st, {}) : predict_karamouzas(st, {});
      for (const auto& a : base.agents) {
        const auto& p = std::get<PointSequence>(a.forecast).points;
        const auto& q = points_of(moved, a.agent_id);
        for (std::size_t k = 0; k < p.size(); ++k) EXPECT_NEAR((r * p[k] + shift - q[k]).norm(), 0.0, 1e-9);
      }
    }
  }
}

TEST(ForceModels, CrowdRolloutIsFiniteAndSpeedBounded) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto s = random_crowd(seed, 20);
    for (int model = 0; model < 2; ++model) {
      const auto p = model == 0 ? predict_social_force(s, {}) : predict_karamouzas(s, {});
      for (const auto& a : s.agents) {
        const auto& path = points_of(p, a.agent_id);
        const double v = estimate_velocity(a.observed, s.dt).norm();
        Vec2 prev = a.observed.back();
        for (const auto& q : path) {
          ASSERT_TRUE(q.allFinite());
          EXPECT_LE((q - prev).norm(), 1.3 * v * s.dt + 1e-9);
          prev = q;
        }
      }
    }
  }
}

TEST(ForceModels, ObstacleRepels) {
  // Agent walking along y = 0 with a wall of occupied cells at y in [0.4, 0.6).
  auto s = single_agent(Vec2(-3, 0), Vec2(1, 0));
  EnvironmentModel env;
  env.resolution = 0.2;
  env.origin = Vec2(-10, -2);
  const int w = 100, h = 20;
  env.grid = EnvironmentModel::Grid{w, h, std::vector<std::uint8_t>(w * h, 255)};
  for (int ix = 0; ix < w; ++ix) env.grid->cells[12 * w + ix] = 0;  // iy = 12 -> y in [0.4, 0.6)
  s.environment = std::make_shared<const EnvironmentModel>(env);
  const auto p = points_of(predict_social_force(s, {}), 1);
  EXPECT_LT(p.back().y(), -1e-3);
}

TEST(Kara, TimeToCollisionOracle) {
  // centres 4 m apart closing at 2 m/s; contact when distance = 0.6
  const auto t = time_to_collision(Vec2(-4, 0), Vec2(2, 0), 0.3, 3.0);
  ASSERT_TRUE(t);
  EXPECT_NEAR(*t, (4.0 - 0.6) / 2.0, 1e-12);
  EXPECT_EQ(time_to_collision(Vec2(0.5, 0), Vec2(1, 0), 0.3, 3.0), 0.0);  // overlapping
  EXPECT_FALSE(time_to_collision(Vec2(-4, 0), Vec2(-1, 0), 0.3, 3.0));  // diverging
  EXPECT_FALSE(time_to_collision(Vec2(-40, 0), Vec2(2, 0), 0.3, 3.0));  // beyond horizon
  EXPECT_FALSE(time_to_collision(Vec2(-4, 2), Vec2(2, 0), 0.3, 3.0));   // passes wide
}

TEST(Kara, EvasiveForceOnlyForPredictedCollisions) {
  const KaraParams p;
  const AgentState a{Vec2(-1.5, 0), Vec2(1, 0)};
  const AgentState b{Vec2(1.5, 0.2), Vec2(-1, 0)};
  const Vec2 f = evasive_force(a, b, p);
  EXPECT_GT(f.norm(), 0.0);
  EXPECT_LT(f.y(), 0.0);  // pushed away from b's side
  const AgentState c{Vec2(1.5, 0.2), Vec2(1, 0)};
  const AgentState d{Vec2(-1.5, 0.0), Vec2(-1, 0)};
  EXPECT_EQ(evasive_force(c, d, p), Vec2(0, 0));
}

TEST(Kara, EvasiveMagnitudeFormula) {
  KaraParams p;
  p.horizon = 3.0;
  p.evasion = 1.5;
  p.min_distance = 0.5;
  const AgentState a{Vec2(-2, 0.1), Vec2(1, 0)};
  const AgentState b{Vec2(2, 0), Vec2(-1, 0)};
  const auto tc = time_to_collision(a.position - b.position, a.velocity - b.velocity, p.base.radius, p.horizon);
  ASSERT_TRUE(tc);
  const double t_eff = std::max(*tc, std::min(p.min_distance / 1.0, p.horizon));
  EXPECT_NEAR(evasive_force(a, b, p).norm(), p.evasion * (p.horizon - t_eff) / (p.horizon * t_eff), 1e-12);
}

TEST(Kara, OpposingScenarioFeelsEvasionAtTheFirstStep) {
  const auto s = generate_synthetic(SyntheticKind::kOpposing);
  const Vec2 v1 = estimate_velocity(s.agents[0].observed, s.dt);
  const Vec2 v2 = estimate_velocity(s.agents[1].observed, s.dt);
  const AgentState a{s.agents[0].observed.back(), v1};
  const AgentState b{s.agents[1].observed.back(), v2};
  EXPECT_GT(evasive_force(a, b, {}).norm(), 0.0);
}

TEST(Kara, CrossingAgentsDeviateLaterallyBeforeTheCrossing) {
  const auto s = generate_synthetic(SyntheticKind::kCrossing);
  const auto kara = predict_karamouzas(s, {});
  const auto cvm = predict_cvm(s);
  const auto& k1 = points_of(kara, 1);
  const auto& k2 = points_of(kara, 2);
  std::size_t closest = 0;
  for (std::size_t k = 1; k < k1.size(); ++k)
    if ((k1[k] - k2[k]).norm() < (k1[closest] - k2[closest]).norm()) closest = k;
  // Agent 1 heads +x along y = 0, agent 2 heads +y along x = 0.
  EXPECT_NEAR(points_of(cvm, 1)[closest].y(), 0.0, 1e-9);
  EXPECT_NEAR(points_of(cvm, 2)[closest].x(), 0.0, 1e-9);
  EXPECT_GT(std::abs(k1[closest].y()), 1e-3);
  EXPECT_GT(std::abs(k2[closest].x()), 1e-3);
}

TEST(Params, RoundTripAndValidation) {
  SofParams p;
  p.tau = 0.9;
  EXPECT_EQ(SofParams::from_params(p.to_params()).tau, 0.9);
  KaraParams k;
  k.horizon = 4.0;
  const auto back = KaraParams::from_params(k.to_params());
  EXPECT_EQ(back.horizon, 4.0);
  EXPECT_EQ(back.base.tau, k.base.tau);
  EXPECT_THROW(SofParams::from_params({{"tua", 1.0}}), ValidationError);
  SofParams bad;
  bad.sub_dt = 1.0;
  EXPECT_THROW(bad.validate(0.4), ValidationError);
  EXPECT_THROW(make_builtin_predictor("cvm", {{"tau", 1.0}}), ValidationError);
  EXPECT_THROW(make_builtin_predictor("lstm"), ValidationError);
  EXPECT_EQ(make_builtin_predictor("kara", {{"evasion", 2.0}})->params().at("evasion"), 2.0);
}
