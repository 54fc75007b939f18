#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "trajbench/geometry.hpp"
#include "trajbench/prediction.hpp"
#include "trajbench/scenario.hpp"

namespace trajbench {

/// Flat name -> value hyperparameter document.
using ParamSet = std::map<std::string, double>;

enum class VelocityMode {
  kGaussian,        ///< Gaussian-weighted finite differences
  kLastDifference,  ///< (p_0 - p_-1) / dt
};

/// Weights for the backward finite differences v_-1 .. v_-(O_p - 1):
/// w(t) = g(t) / sum g, g(t) = exp(-t^2 / (2 sigma^2)).
struct VelocityFilter {
  VelocityMode mode = VelocityMode::kGaussian;
  double sigma = 1.5;  ///< frames

  std::vector<double> weights(std::size_t differences) const;
};

/// Filtered current velocity from positions sampled every `dt` seconds.
Vec2 estimate_velocity(std::span<const Vec2> observed, double dt, const VelocityFilter& filter = {});

inline constexpr int kGoalProjectionSteps = 40;

/// position + steps * dt * velocity.
Vec2 project_goal(const Vec2& position, const Vec2& velocity, double dt, int steps = kGoalProjectionSteps);

struct SofParams {
  double tau = 0.5;           ///< relaxation time, s
  double a = 2.0;             ///< agent repulsion strength, m/s^2
  double b = 0.3;             ///< agent repulsion range, m
  double lambda = 0.35;       ///< anisotropy, [0, 1]
  double a_obs = 5.0;         ///< obstacle strength, m/s^2
  double b_obs = 0.2;         ///< obstacle range, m
  double radius = 0.3;        ///< agent radius, m
  double sub_dt = 0.1;        ///< integration substep, s
  double max_speed_factor = 1.3;

  void validate(double frame_dt) const;
  ParamSet to_params() const;
  static SofParams from_params(const ParamSet& params);
};

struct KaraParams {
  SofParams base;
  double horizon = 3.0;        ///< anticipation horizon t_h, s
  double evasion = 1.5;        ///< evasive strength E
  double min_distance = 0.5;   ///< d_min, m

  void validate(double frame_dt) const;
  ParamSet to_params() const;
  static KaraParams from_params(const ParamSet& params);
};

struct AgentState {
  Vec2 position = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();
};

Prediction predict_cvm(const Scenario& scenario, const VelocityFilter& filter = {});
Prediction predict_social_force(const Scenario& scenario, const SofParams& params, const VelocityFilter& filter = {});
Prediction predict_karamouzas(const Scenario& scenario, const KaraParams& params, const VelocityFilter& filter = {});

/// Smallest t in (0, horizon] with |dp + dv t| = 2 * radius; 0 when the pair
/// already overlaps; nullopt when no contact is predicted.
std::optional<double> time_to_collision(const Vec2& dp, const Vec2& dv, double radius, double horizon);

/// Anticipatory force on `self` caused by `other`. Zero when no collision is
/// predicted within the horizon.
Vec2 evasive_force(const AgentState& self, const AgentState& other, const KaraParams& params);

/// Common interface of built-in and external predictors.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::string id() const = 0;
  virtual Prediction predict(const Scenario& scenario) = 0;
  /// Current hyperparameters, empty for parameter-free predictors.
  virtual ParamSet params() const { return {}; }
};

class CvmPredictor final : public Predictor {
 public:
  explicit CvmPredictor(VelocityFilter filter = {}) : filter_(filter) {}
  std::string id() const override;
  Prediction predict(const Scenario& scenario) override { return predict_cvm(scenario, filter_); }

 private:
  VelocityFilter filter_;
};

class SocialForcePredictor final : public Predictor {
 public:
  explicit SocialForcePredictor(SofParams params = {}, VelocityFilter filter = {}) : params_(params), filter_(filter) {}
  std::string id() const override { return "sof"; }
  Prediction predict(const Scenario& scenario) override { return predict_social_force(scenario, params_, filter_); }
  ParamSet params() const override { return params_.to_params(); }

 private:
  SofParams params_;
  VelocityFilter filter_;
};

class KaramouzasPredictor final : public Predictor {
 public:
  explicit KaramouzasPredictor(KaraParams params = {}, VelocityFilter filter = {}) : params_(params), filter_(filter) {}
  std::string id() const override { return "kara"; }
  Prediction predict(const Scenario& scenario) override { return predict_karamouzas(scenario, params_, filter_); }
  ParamSet params() const override { return params_.to_params(); }

 private:
  KaraParams params_;
  VelocityFilter filter_;
};

/// Builds "cvm", "sof" or "kara"; `params` overrides defaults by name.
std::unique_ptr<Predictor> make_builtin_predictor(const std::string& id, const ParamSet& params = {},
                                                  VelocityFilter filter = {});

}  // namespace trajbench
