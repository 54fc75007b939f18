#include "trajbench/predictors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>

#include "trajbench/error.hpp"

namespace trajbench {

// Motion state ----------------------------------------------------------------

std::vector<double> VelocityFilter::weights(std::size_t differences) const {
  std::vector<double> w(differences);
  if (differences == 0) return w;
  if (mode == VelocityMode::kLastDifference) {
    w[0] = 1.0;
    return w;
  }
  if (!(sigma > 0.0)) throw ValidationError("velocity filter sigma must be > 0");
  double total = 0.0;
  for (std::size_t t = 1; t <= differences; ++t) {
    const double x = static_cast<double>(t) / sigma;
    w[t - 1] = std::exp(-0.5 * x * x);
    total += w[t - 1];
  }
  for (auto& v : w) v /= total;
  return w;
}

Vec2 estimate_velocity(std::span<const Vec2> observed, double dt, const VelocityFilter& filter) {
  if (observed.size() < 2) throw ValidationError("velocity estimation needs at least 2 observations");
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  const std::size_t n = observed.size();
  const auto w = filter.weights(n - 1);
  Vec2 v = Vec2::Zero();
  // w[t - 1] weighs v_-t = (p_{-t+1} - p_{-t}) / dt, most recent first.
  for (std::size_t t = 1; t < n; ++t) {
    if (w[t - 1] == 0.0) continue;
    v += w[t - 1] * (observed[n - t] - observed[n - t - 1]) / dt;
  }
  return v;
}

Vec2 project_goal(const Vec2& position, const Vec2& velocity, double dt, int steps) {
  return position + (static_cast<double>(steps) * dt) * velocity;
}

Prediction predict_cvm(const Scenario& scenario, const VelocityFilter& filter) {
  Prediction out;
  out.agents.reserve(scenario.agents.size());
  for (const auto& a : scenario.agents) {
    const Vec2 v = estimate_velocity(a.observed, scenario.dt, filter);
    const Vec2& last = a.observed.back();
    PointSequence ps;
    ps.points.reserve(static_cast<std::size_t>(scenario.prediction_frames));
    for (int t = 1; t <= scenario.prediction_frames; ++t) ps.points.push_back(last + (t * scenario.dt) * v);
    out.agents.push_back({a.agent_id, std::move(ps)});
  }
  return out;
}

// Parameters ------------------------------------------------------------------

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

double take(const ParamSet& params, const std::string& key, double fallback) {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

template <std::size_t N>
void reject_unknown(const ParamSet& params, const std::array<std::string_view, N>& known) {
  for (const auto& [k, v] : params)
    if (std::find(known.begin(), known.end(), k) == known.end()) throw ValidationError("unknown parameter '" + k + "'");
}

constexpr std::array<std::string_view, 9> kSofKeys = {"tau",    "a",      "b",      "lambda",
                                                              "a_obs",  "b_obs",  "radius", "sub_dt",
                                                              "max_speed_factor"};

}  // namespace

void SofParams::validate(double frame_dt) const {
  require(tau > 0.0 && std::isfinite(tau), "tau must be > 0");
  require(a >= 0.0 && std::isfinite(a), "a must be >= 0");
  require(b > 0.0 && std::isfinite(b), "b must be > 0");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must lie in [0, 1]");
  require(a_obs >= 0.0 && std::isfinite(a_obs), "a_obs must be >= 0");
  require(b_obs > 0.0 && std::isfinite(b_obs), "b_obs must be > 0");
  require(radius > 0.0 && std::isfinite(radius), "radius must be > 0");
  require(sub_dt > 0.0 && sub_dt <= frame_dt * (1.0 + 1e-9), "sub_dt must lie in (0, frame dt]");
  require(max_speed_factor > 0.0, "max_speed_factor must be > 0");
}

ParamSet SofParams::to_params() const {
  return {{"tau", tau},       {"a", a},           {"b", b},           {"lambda", lambda},
          {"a_obs", a_obs},   {"b_obs", b_obs},   {"radius", radius}, {"sub_dt", sub_dt},
          {"max_speed_factor", max_speed_factor}};
}

SofParams SofParams::from_params(const ParamSet& params) {
  reject_unknown(params, kSofKeys);
  SofParams p;
  p.tau = take(params, "tau", p.tau);
  p.a = take(params, "a", p.a);
  p.b = take(params, "b", p.b);
  p.lambda = take(params, "lambda", p.lambda);
  p.a_obs = take(params, "a_obs", p.a_obs);
  p.b_obs = take(params, "b_obs", p.b_obs);
  p.radius = take(params, "radius", p.radius);
  p.sub_dt = take(params, "sub_dt", p.sub_dt);
  p.max_speed_factor = take(params, "max_speed_factor", p.max_speed_factor);
  return p;
}

void KaraParams::validate(double frame_dt) const {
  base.validate(frame_dt);
  require(horizon > 0.0 && std::isfinite(horizon), "horizon must be > 0");
  require(evasion >= 0.0 && std::isfinite(evasion), "evasion must be >= 0");
  require(min_distance > 0.0 && std::isfinite(min_distance), "min_distance must be > 0");
}

ParamSet KaraParams::to_params() const {
  auto p = base.to_params();
  p["horizon"] = horizon;
  p["evasion"] = evasion;
  p["min_distance"] = min_distance;
  return p;
}

KaraParams KaraParams::from_params(const ParamSet& params) {
  ParamSet sof;
  KaraParams k;
  for (const auto& [key, v] : params) {
    if (key == "horizon") {
      k.horizon = v;
    } else if (key == "evasion") {
      k.evasion = v;
    } else if (key == "min_distance") {
      k.min_distance = v;
    } else {
      sof[key] = v;
    }
  }
  k.base = SofParams::from_params(sof);
  return k;
}

// Force models -----------------------------------------------------------------

std::optional<double> time_to_collision(const Vec2& dp, const Vec2& dv, double radius, double horizon) {
  const double contact = 2.0 * radius;
  const double c = dp.squaredNorm() - contact * contact;
  if (c <= 0.0) return 0.0;
  const double a = dv.squaredNorm();
  if (a < 1e-18) return std::nullopt;
  const double b = dp.dot(dv);
  const double disc = b * b - a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / a;
  if (t <= 0.0 || t > horizon) return std::nullopt;
  return t;
}

Vec2 evasive_force(const AgentState& self, const AgentState& other, const KaraParams& params) {
  const auto tc = time_to_collision(self.position - other.position, self.velocity - other.velocity, params.base.radius,
                                    params.horizon);
  if (!tc) return Vec2::Zero();
  Vec2 away = (self.position + *tc * self.velocity) - (other.position + *tc * other.velocity);
  if (away.norm() < 1e-12) away = self.position - other.position;
  const double len = away.norm();
  if (len < 1e-12) return Vec2::Zero();
  // Distance travelled before contact below d_min saturates the response.
  const double speed = self.velocity.norm();
  const double t_sat = speed > 1e-12 ? std::min(params.min_distance / speed, params.horizon) : params.horizon;
  const double t_eff = std::max(*tc, t_sat);
  const double magnitude = params.evasion * (params.horizon - t_eff) / (params.horizon * t_eff);
  return magnitude * away / len;
}

namespace {

struct Walker {
  Vec2 position;
  Vec2 velocity;
  Vec2 goal;
  double desired_speed = 0.0;
};

Vec2 agent_repulsion(const Walker& self, const Walker& other, const SofParams& p) {
  const Vec2 diff = self.position - other.position;
  const double d = diff.norm();
  if (d < 1e-12) return Vec2::Zero();
  const Vec2 n = diff / d;
  const double speed = self.velocity.norm();
  const double cos_phi = speed > 1e-12 ? -n.dot(self.velocity) / speed : 0.0;
  const double anisotropy = p.lambda + (1.0 - p.lambda) * 0.5 * (1.0 + cos_phi);
  return p.a * std::exp((2.0 * p.radius - d) / p.b) * anisotropy * n;
}

/// Force from the nearest occupied cell, searched in growing square rings.
Vec2 obstacle_repulsion(const Vec2& position, const EnvironmentModel& env, const SofParams& p) {
  if (!env.grid || p.a_obs == 0.0) return Vec2::Zero();
  // Beyond this distance the force is below 1e-12 * a_obs.
  const double cutoff = p.radius + p.b_obs * 27.7;
  const int max_ring = static_cast<int>(std::ceil(cutoff / env.resolution)) + 1;
  const Eigen::Vector2i c = env.cell_of(position);
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_point = Vec2::Zero();
  Vec2 best_center = Vec2::Zero();
  auto visit = [&](int ix, int iy) {
    if (!env.occupied(ix, iy)) return;
    const Vec2 lo = env.origin + Vec2(ix, iy) * env.resolution;
    const Vec2 hi = lo + Vec2::Constant(env.resolution);
    const Vec2 q = position.cwiseMax(lo).cwiseMin(hi);
    const double d = (position - q).norm();
    if (d < best) {
      best = d;
      best_point = q;
      best_center = env.cell_center(ix, iy);
    }
  };
  for (int ring = 0; ring <= max_ring; ++ring) {
    if (std::isfinite(best) && (ring - 1) * env.resolution > best) break;
    for (int dx = -ring; dx <= ring; ++dx) {
      visit(c.x() + dx, c.y() - ring);
      if (ring > 0) visit(c.x() + dx, c.y() + ring);
    }
    for (int dy = -ring + 1; dy <= ring - 1; ++dy) {
      visit(c.x() - ring, c.y() + dy);
      visit(c.x() + ring, c.y() + dy);
    }
  }
  if (!std::isfinite(best) || best > cutoff) return Vec2::Zero();
  Vec2 away = position - best_point;
  if (away.norm() < 1e-12) away = position - best_center;
  if (away.norm() < 1e-12) return Vec2::Zero();
  return p.a_obs * std::exp((p.radius - best) / p.b_obs) * away.normalized();
}

using ExtraForce = std::function<Vec2(std::size_t, const std::vector<Walker>&)>;

Prediction rollout(const Scenario& scenario, const SofParams& p, const VelocityFilter& filter, const ExtraForce& extra) {
  p.validate(scenario.dt);
  const double dt = scenario.dt;
  std::vector<Walker> walkers;
  walkers.reserve(scenario.agents.size());
  for (const auto& a : scenario.agents) {
    const Vec2 v = estimate_velocity(a.observed, dt, filter);
    walkers.push_back({a.observed.back(), v, project_goal(a.observed.back(), v, dt), v.norm()});
  }
  const EnvironmentModel* env = scenario.environment.get();
  const int substeps = std::max(1, static_cast<int>(std::ceil(dt / p.sub_dt - 1e-9)));
  const double h = dt / substeps;

  std::vector<Path> paths(walkers.size());
  std::vector<Vec2> accel(walkers.size());
  for (int frame = 1; frame <= scenario.prediction_frames; ++frame) {
    for (int s = 0; s < substeps; ++s) {
      for (std::size_t i = 0; i < walkers.size(); ++i) {
        const auto& w = walkers[i];
        Vec2 desired = Vec2::Zero();
        const Vec2 to_goal = w.goal - w.position;
        const double goal_dist = to_goal.norm();
        if (w.desired_speed > 0.0 && goal_dist > 1e-9) desired = w.desired_speed * to_goal / goal_dist;
        Vec2 a = (desired - w.velocity) / p.tau;
        for (std::size_t j = 0; j < walkers.size(); ++j)
          if (j != i) a += agent_repulsion(w, walkers[j], p);
        if (env) a += obstacle_repulsion(w.position, *env, p);
        if (extra) a += extra(i, walkers);
        accel[i] = a;
      }
      // Semi-implicit Euler: velocity first, then position with the new velocity.
      for (std::size_t i = 0; i < walkers.size(); ++i) {
        auto& w = walkers[i];
        w.velocity += h * accel[i];
        const double limit = p.max_speed_factor * w.desired_speed;
        const double speed = w.velocity.norm();
        if (speed > limit) w.velocity *= (speed > 0.0 ? limit / speed : 0.0);
        w.position += h * w.velocity;
      }
    }
    for (std::size_t i = 0; i < walkers.size(); ++i) paths[i].push_back(walkers[i].position);
  }

  Prediction out;
  out.agents.reserve(walkers.size());
  for (std::size_t i = 0; i < walkers.size(); ++i) {
    for (const auto& q : paths[i])
      if (!q.allFinite()) throw ValidationError("force model produced a non-finite state");
    out.agents.push_back({scenario.agents[i].agent_id, PointSequence{std::move(paths[i])}});
  }
  return out;
}

}  // namespace

Prediction predict_social_force(const Scenario& scenario, const SofParams& params, const VelocityFilter& filter) {
  return rollout(scenario, params, filter, {});
}

Prediction predict_karamouzas(const Scenario& scenario, const KaraParams& params, const VelocityFilter& filter) {
  params.validate(scenario.dt);
  auto evasive = [&params](std::size_t i, const std::vector<Walker>& walkers) {
    Vec2 f = Vec2::Zero();
    const AgentState self{walkers[i].position, walkers[i].velocity};
    for (std::size_t j = 0; j < walkers.size(); ++j)
      if (j != i) f += evasive_force(self, {walkers[j].position, walkers[j].velocity}, params);
    return f;
  };
  return rollout(scenario, params.base, filter, evasive);
}

std::string CvmPredictor::id() const { return filter_.mode == VelocityMode::kLastDifference ? "cvm-last" : "cvm"; }

std::unique_ptr<Predictor> make_builtin_predictor(const std::string& id, const ParamSet& params, VelocityFilter filter) {
  if (id == "cvm") {
    if (!params.empty()) throw ValidationError("cvm takes no parameters");
    return std::make_unique<CvmPredictor>(filter);
  }
  if (id == "sof") return std::make_unique<SocialForcePredictor>(SofParams::from_params(params), filter);
  if (id == "kara") return std::make_unique<KaramouzasPredictor>(KaraParams::from_params(params), filter);
  throw ValidationError("unknown predictor '" + id + "'");
}

}  // namespace trajbench
