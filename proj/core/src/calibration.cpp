#include "trajbench/calibration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "trajbench/error.hpp"
#include "trajbench/metrics.hpp"
#include "trajbench/report.hpp"

namespace trajbench {

void ParamSpace::validate() const {
  for (const auto& d : dims) {
    if (!(d.lower < d.upper)) throw ValidationError("parameter '" + d.name + "' needs lower < upper");
    if (d.scale == ParamScale::kLog && !(d.lower > 0.0))
      throw ValidationError("log-scaled parameter '" + d.name + "' needs positive bounds");
  }
}

bool ParamSpace::contains(const ParamSet& params) const {
  for (const auto& d : dims) {
    const auto it = params.find(d.name);
    if (it == params.end() || it->second < d.lower || it->second > d.upper) return false;
  }
  return true;
}

ParamSpace ParamSpace::for_predictor(const std::string& predictor_id) {
  ParamSpace s;
  if (predictor_id == "sof" || predictor_id == "kara") {
    s.dims = {{"tau", 0.2, 2.0, ParamScale::kLinear},
              {"a", 0.0, 10.0, ParamScale::kLinear},
              {"b", 0.1, 3.0, ParamScale::kLinear},
              {"lambda", 0.0, 1.0, ParamScale::kLinear},
              {"radius", 0.2, 0.5, ParamScale::kLinear}};
  }
  if (predictor_id == "kara") {
    s.dims.push_back({"evasion", 0.0, 10.0, ParamScale::kLinear});
    s.dims.push_back({"horizon", 0.5, 5.0, ParamScale::kLinear});
    s.dims.push_back({"min_distance", 0.2, 1.0, ParamScale::kLinear});
  }
  return s;
}

std::string CalibrationResult::trace_csv() const {
  std::ostringstream out;
  out << "trial,value,incumbent,elapsed_s";
  if (trace.empty()) return out.str() + "\n";
  for (const auto& [k, v] : trace.front().params) out << "," << k;
  out << "\n";
  double incumbent = std::numeric_limits<double>::infinity();
  for (const auto& t : trace) {
    incumbent = std::min(incumbent, t.value);
    out << t.index << "," << format_double(t.value) << "," << format_double(incumbent) << ","
        << format_double(t.elapsed_s);
    for (const auto& [k, v] : t.params) out << "," << format_double(v);
    out << "\n";
  }
  return out.str();
}

std::pair<Dataset, Dataset> split_calibration(const Dataset& dataset, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ValidationError("calibration fraction must lie in (0, 1)");
  const auto [t_min, t_max] = dataset.time_span();
  const double boundary = t_min + fraction * (t_max - t_min);
  Dataset calib;
  Dataset holdout;
  for (auto* d : {&calib, &holdout}) {
    d->frequency_hz = dataset.frequency_hz;
    d->environment = dataset.environment;
  }
  calib.name = dataset.name + ":calibration";
  holdout.name = dataset.name + ":holdout";
  for (const auto& t : dataset.tracks) {
    AgentTrack a{t.agent_id, 0, {}};
    AgentTrack b{t.agent_id, 0, {}};
    for (const auto& d : t.detections) (d.time < boundary ? a : b).detections.push_back(d);
    if (!a.empty()) calib.tracks.push_back(std::move(a));
    if (!b.empty()) holdout.tracks.push_back(std::move(b));
  }
  calib.reindex();
  holdout.reindex();
  return {std::move(calib), std::move(holdout)};
}

namespace {

std::uint64_t trial_seed(std::uint64_t seed, std::size_t index) {
  std::uint64_t x = seed ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double to_unit(const ParamDim& d, double v) {
  if (d.scale == ParamScale::kLog) return (std::log(v) - std::log(d.lower)) / (std::log(d.upper) - std::log(d.lower));
  return (v - d.lower) / (d.upper - d.lower);
}

double from_unit(const ParamDim& d, double u) {
  u = std::clamp(u, 0.0, 1.0);
  if (d.scale == ParamScale::kLog) return std::exp(std::log(d.lower) + u * (std::log(d.upper) - std::log(d.lower)));
  return d.lower + u * (d.upper - d.lower);
}

}  // namespace

CalibrationResult minimize(const Objective& objective, const ParamSpace& space, const ParamSet& defaults,
                           const CalibrationOptions& options) {
  space.validate();
  if (options.budget < 1) throw ValidationError("calibration budget must be >= 1");
  if (space.dims.empty()) throw ValidationError("parameter space is empty; nothing to calibrate");
  if (!space.contains(defaults)) throw ValidationError("default parameters lie outside the search space");

  const auto start = std::chrono::steady_clock::now();
  CalibrationResult result;
  result.seed = options.seed;
  result.budget = options.budget;
  result.best_value = std::numeric_limits<double>::infinity();

  auto evaluate = [&](const ParamSet& params) {
    const double value = objective(params);
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.trace.push_back({result.trace.size(), params, value, elapsed});
    if (value < result.best_value || result.trace.size() == 1) {
      result.best_value = value;
      result.best_params = params;
    }
    return value;
  };

  evaluate(defaults);

  const std::size_t refine_trials =
      options.refine ? static_cast<std::size_t>(std::floor(static_cast<double>(options.budget) * options.refine_fraction))
                     : 0;
  const std::size_t random_end = options.budget - std::min(refine_trials, options.budget - 1);
  auto random_trial = [&](std::size_t index) {
    std::mt19937_64 rng(trial_seed(options.seed, index));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    ParamSet p = defaults;
    for (const auto& d : space.dims) p[d.name] = from_unit(d, unit(rng));
    evaluate(p);
  };
  while (result.trace.size() < random_end) random_trial(result.trace.size());

  // Coordinate refinement around the incumbent, in unit-scaled coordinates.
  std::vector<double> step(space.dims.size(), options.refine_step);
  std::size_t dim = 0;
  std::size_t idle = 0;
  while (result.trace.size() < options.budget) {
    const auto& d = space.dims[dim];
    bool improved = false;
    bool evaluated = false;
    for (double sign : {1.0, -1.0}) {
      if (result.trace.size() >= options.budget) break;
      const ParamSet incumbent = result.best_params;
      ParamSet candidate = incumbent;
      candidate[d.name] = from_unit(d, to_unit(d, incumbent.at(d.name)) + sign * step[dim]);
      if (candidate[d.name] == incumbent.at(d.name)) continue;
      const double before = result.best_value;
      evaluate(candidate);
      evaluated = true;
      if (result.best_value < before) {
        improved = true;
        break;
      }
    }
    if (!improved) step[dim] *= 0.5;
    idle = evaluated ? 0 : idle + 1;
    if (idle > space.dims.size() * 64) {
      // Every step collapsed below floating resolution; spend the rest randomly.
      while (result.trace.size() < options.budget) random_trial(result.trace.size());
    }
    dim = (dim + 1) % space.dims.size();
  }
  return result;
}

CalibrationResult calibrate(const std::string& predictor_id, const ParamSpace& space, const Dataset& dataset,
                            const ScenarioSpec& spec, const CalibrationOptions& options, const VelocityFilter& filter) {
  ScenarioSpec objective_spec = spec;
  objective_spec.prediction_frames =
      std::max(1, static_cast<int>(std::lround(options.objective_horizon_s * dataset.frequency_hz)));
  const auto scenarios = extract_scenarios(dataset, objective_spec);
  if (scenarios.empty()) throw Error("empty calibration scenario set for dataset '" + dataset.name + "'");

  const auto defaults = make_builtin_predictor(predictor_id, {}, filter)->params();
  auto objective = [&](const ParamSet& params) {
    auto predictor = make_builtin_predictor(predictor_id, params, filter);
    double sum = 0.0;
    for (const auto& s : scenarios) sum += summarize(s, score_scenario(s, predictor->predict(s))).fde;
    return sum / static_cast<double>(scenarios.size());
  };
  return minimize(objective, space, defaults, options);
}

}  // namespace trajbench
