#include "trajbench/metrics.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include "trajbench/error.hpp"

namespace trajbench {

namespace {

void check_lengths(std::size_t predicted, std::size_t gt) {
  if (predicted != gt) throw ValidationError("length mismatch: prediction has " + std::to_string(predicted) +
                                             " steps, ground truth " + std::to_string(gt));
  if (gt == 0) throw ValidationError("empty trajectory");
}

double neg_log(double density) { return -std::log(std::max(density, kDensityFloor)); }

}  // namespace

double ade(std::span<const Vec2> predicted, std::span<const Vec2> gt) {
  check_lengths(predicted.size(), gt.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) sum += (predicted[t] - gt[t]).norm();
  return sum / static_cast<double>(gt.size());
}

double fde(std::span<const Vec2> predicted, std::span<const Vec2> gt) {
  check_lengths(predicted.size(), gt.size());
  return (predicted.back() - gt.back()).norm();
}

double top_k_ade(const SampleSet& samples, std::span<const Vec2> gt) {
  if (samples.samples.empty()) throw ValidationError("empty sample set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples.samples) best = std::min(best, ade(s, gt));
  return best;
}

double top_k_fde(const SampleSet& samples, std::span<const Vec2> gt) {
  if (samples.samples.empty()) throw ValidationError("empty sample set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : samples.samples) best = std::min(best, fde(s, gt));
  return best;
}

double gaussian_density(const Gaussian2& g, const Vec2& x) {
  if (!is_spd(g.covariance)) throw ValidationError("covariance is not symmetric positive definite");
  const double det = g.covariance.determinant();
  const Vec2 d = x - g.mean;
  const double mahalanobis = d.dot(g.covariance.inverse() * d);
  return std::exp(-0.5 * mahalanobis) / (2.0 * std::numbers::pi * std::sqrt(det));
}

double mixture_density(const GaussianMixtureSequence& mixture, std::size_t step, const Vec2& x) {
  if (mixture.weights.size() != mixture.modes.size()) throw ValidationError("mixture needs one weight per mode");
  double p = 0.0;
  for (std::size_t i = 0; i < mixture.modes.size(); ++i) {
    if (step >= mixture.modes[i].size()) throw ValidationError("mixture mode shorter than the horizon");
    p += mixture.weights[i] * gaussian_density(mixture.modes[i][step], x);
  }
  return p;
}

double grid_density(const ProbabilityGrid& grid, const Vec2& x) {
  const Vec2 rel = (x - grid.origin) / grid.resolution;
  const auto ix = static_cast<long long>(std::floor(rel.x()));
  const auto iy = static_cast<long long>(std::floor(rel.y()));
  if (ix < 0 || iy < 0 || ix >= grid.width || iy >= grid.height) return 0.0;
  return grid.at(static_cast<int>(ix), static_cast<int>(iy)) / (grid.resolution * grid.resolution);
}

double nlp(const GaussianMixtureSequence& mixture, std::span<const Vec2> gt) {
  if (mixture.modes.empty()) throw ValidationError("empty mixture");
  check_lengths(mixture.modes.front().size(), gt.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) sum += neg_log(mixture_density(mixture, t, gt[t]));
  return sum / static_cast<double>(gt.size());
}

double nlp(const GridSequence& grids, std::span<const Vec2> gt) {
  check_lengths(grids.grids.size(), gt.size());
  double sum = 0.0;
  for (std::size_t t = 0; t < gt.size(); ++t) sum += neg_log(grid_density(grids.grids[t], gt[t]));
  return sum / static_cast<double>(gt.size());
}

AgentScore score_forecast(AgentId id, const Forecast& forecast, std::span<const Vec2> gt) {
  AgentScore s;
  s.agent_id = id;
  if (const auto* points = std::get_if<PointSequence>(&forecast)) {
    // A deterministic forecast is a single-sample set.
    const SampleSet single{{points->points}};
    s.ade = top_k_ade(single, gt);
    s.fde = top_k_fde(single, gt);
  } else if (const auto* samples = std::get_if<SampleSet>(&forecast)) {
    s.ade = top_k_ade(*samples, gt);
    s.fde = top_k_fde(*samples, gt);
  } else {
    const auto path = most_likely_path(forecast);
    s.ade = ade(path, gt);
    s.fde = fde(path, gt);
    if (const auto* grid = std::get_if<GridSequence>(&forecast)) {
      s.nlp = nlp(*grid, gt);
    } else {
      s.nlp = nlp(std::get<GaussianMixtureSequence>(forecast), gt);
    }
  }
  return s;
}

std::vector<AgentScore> score_scenario(const Scenario& scenario, const Prediction& prediction) {
  std::vector<AgentScore> out;
  for (const auto& a : scenario.agents) {
    if (!a.is_target) continue;
    const auto* f = prediction.find(a.agent_id);
    if (!f) throw ValidationError("prediction is missing target agent " + std::to_string(a.agent_id));
    out.push_back(score_forecast(a.agent_id, *f, a.future_gt));
  }
  return out;
}

ScenarioScore summarize(const Scenario& scenario, const std::vector<AgentScore>& scores) {
  ScenarioScore s;
  s.agents = scenario.agents.size();
  s.targets = scores.size();
  if (scores.empty()) return s;
  double nlp_sum = 0.0;
  std::size_t nlp_count = 0;
  for (const auto& a : scores) {
    s.ade += a.ade;
    s.fde += a.fde;
    if (a.nlp) {
      nlp_sum += *a.nlp;
      ++nlp_count;
    }
  }
  s.ade /= static_cast<double>(scores.size());
  s.fde /= static_cast<double>(scores.size());
  if (nlp_count > 0) s.nlp = nlp_sum / static_cast<double>(nlp_count);
  return s;
}

}  // namespace trajbench
