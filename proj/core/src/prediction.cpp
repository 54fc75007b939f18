#include "trajbench/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trajbench/error.hpp"

namespace trajbench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_path(const Path& path, std::size_t horizon, const char* what) {
  if (path.empty()) throw ValidationError(std::string(what) + " is empty");
  if (horizon > 0 && path.size() != horizon)
    throw ValidationError(std::string(what) + " has " + std::to_string(path.size()) + " steps, expected " +
                          std::to_string(horizon));
  for (const auto& p : path)
    if (!p.allFinite()) throw ValidationError(std::string(what) + " contains non-finite positions");
}

}  // namespace

bool is_spd(const Mat2& m) {
  if (!m.allFinite()) return false;
  if (std::abs(m(0, 1) - m(1, 0)) > 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())) return false;
  return m(0, 0) > 0.0 && m.determinant() > 0.0;
}

std::string_view representation_name(const Forecast& forecast) {
  return std::visit(Overloaded{[](const PointSequence&) { return std::string_view("points"); },
                               [](const SampleSet&) { return std::string_view("samples"); },
                               [](const GridSequence&) { return std::string_view("grid"); },
                               [](const GaussianMixtureSequence&) { return std::string_view("mixture"); }},
                    forecast);
}

const Forecast* Prediction::find(AgentId id) const {
  for (const auto& a : agents)
    if (a.agent_id == id) return &a.forecast;
  return nullptr;
}

std::size_t forecast_horizon(const Forecast& forecast) {
  return std::visit(
      Overloaded{[](const PointSequence& p) { return p.points.size(); },
                 [](const SampleSet& s) { return s.samples.empty() ? std::size_t{0} : s.samples.front().size(); },
                 [](const GridSequence& g) { return g.grids.size(); },
                 [](const GaussianMixtureSequence& m) { return m.modes.empty() ? std::size_t{0} : m.modes.front().size(); }},
      forecast);
}

void validate_forecast(const Forecast& forecast, std::size_t horizon) {
  std::visit(Overloaded{
                 [&](const PointSequence& p) { check_path(p.points, horizon, "point sequence"); },
                 [&](const SampleSet& s) {
                   if (s.samples.empty()) throw ValidationError("sample set must contain at least one sample");
                   const auto h = horizon ? horizon : s.samples.front().size();
                   for (const auto& path : s.samples) check_path(path, h, "sample");
                 },
                 [&](const GridSequence& g) {
                   if (g.grids.empty() || (horizon && g.grids.size() != horizon))
                     throw ValidationError("grid sequence length does not match the horizon");
                   for (const auto& grid : g.grids) {
                     if (grid.width < 1 || grid.height < 1 || !(grid.resolution > 0.0))
                       throw ValidationError("probability grid has invalid geometry");
                     if (grid.mass.size() != static_cast<std::size_t>(grid.width) * grid.height)
                       throw ValidationError("probability grid size does not match its dimensions");
                     double total = 0.0;
                     for (double m : grid.mass) {
                       if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError("probability grid has invalid mass");
                       total += m;
                     }
                     if (std::abs(total - 1.0) > kGridMassTolerance)
                       throw ValidationError("probability grid sums to " + std::to_string(total) + ", not 1");
                   }
                 },
                 [&](const GaussianMixtureSequence& m) {
                   if (m.weights.empty() || m.weights.size() != m.modes.size())
                     throw ValidationError("mixture needs one weight per mode");
                   double total = 0.0;
                   for (double w : m.weights) {
                     if (!(w >= 0.0) || !std::isfinite(w)) throw ValidationError("mixture weights must be >= 0");
                     total += w;
                   }
                   if (std::abs(total - 1.0) > kMixtureWeightTolerance)
                     throw ValidationError("mixture weights sum to " + std::to_string(total) + ", not 1");
                   const auto h = horizon ? horizon : m.modes.front().size();
                   for (const auto& mode : m.modes) {
                     if (mode.size() != h || h == 0) throw ValidationError("mixture mode length does not match the horizon");
                     for (const auto& g : mode) {
                       if (!g.mean.allFinite()) throw ValidationError("mixture mean is not finite");
                       if (!is_spd(g.covariance)) throw ValidationError("mixture covariance is not SPD");
                     }
                   }
                 }},
             forecast);
}

void validate_prediction(const Prediction& prediction, std::size_t horizon) {
  for (const auto& a : prediction.agents) {
    try {
      validate_forecast(a.forecast, horizon);
    } catch (const ValidationError& e) {
      throw ValidationError("agent " + std::to_string(a.agent_id) + ": " + e.what());
    }
  }
}

Path most_likely_path(const Forecast& forecast) {
  return std::visit(
      Overloaded{[](const PointSequence& p) { return p.points; },
                 [](const SampleSet& s) { return s.samples.front(); },
                 [](const GridSequence& g) {
                   Path out;
                   for (const auto& grid : g.grids) {
                     const auto best = std::max_element(grid.mass.begin(), grid.mass.end()) - grid.mass.begin();
                     const int ix = static_cast<int>(best % grid.width);
                     const int iy = static_cast<int>(best / grid.width);
                     out.push_back(grid.origin + Vec2(ix + 0.5, iy + 0.5) * grid.resolution);
                   }
                   return out;
                 },
                 [](const GaussianMixtureSequence& m) {
                   const auto best = std::max_element(m.weights.begin(), m.weights.end()) - m.weights.begin();
                   Path out;
                   for (const auto& g : m.modes[static_cast<std::size_t>(best)]) out.push_back(g.mean);
                   return out;
                 }},
      forecast);
}

}  // namespace trajbench
