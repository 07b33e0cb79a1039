#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "etsim/model.hpp"
#include "etsim/noise.hpp"

namespace etsim {

/// x_next = A x + B u + v with an explicitly supplied noise sample.
Vector step_true_state(const Vector& x, const Vector& u, const SystemParams& p, const Vector& process_noise);

/// Same, drawing the process noise from the model's configured channel.
Vector step_true_state(const Vector& x, const Vector& u, const LinearModel& model, NoiseSource& noise, int step);

/// y = H x + w with an explicitly supplied noise sample.
Vector measure(const Vector& x, const SystemParams& p, const Vector& measurement_noise);

/// Same, drawing the measurement noise from the model's configured channel.
Vector measure(const Vector& x, const LinearModel& model, NoiseSource& noise, int step);

Vector sample_process_noise(const LinearModel& model, const SystemParams& p, NoiseSource& noise);
Vector sample_measurement_noise(const LinearModel& model, const SystemParams& p, NoiseSource& noise);

/// Road-condition change for the platoon: once the lead vehicle's absolute
/// position crosses trigger_position, every vehicle's position integrates the
/// velocity speed_factor times faster and inputs act with input_factor of
/// their nominal effect.
struct SurfaceRule {
  double trigger_position = 200.0;
  double speed_factor = 1.5;
  double input_factor = 0.5;
};

struct PlatoonConfig {
  int vehicles = 10;
  double dt = 0.1;
  std::optional<SurfaceRule> surface;
  double input_noise_half_width = 0.1;        // uniform accel noise [m/s^2]
  double measurement_noise_half_width = 0.1;  // uniform position noise [m]
  double initial_speed = 22.2;                // [m/s]
  double initial_gap = 10.0;                  // [m]
  double initial_speed_sd = 0.1;              // initial belief spread
  double initial_position_sd = 0.1;
};

/// Regime flag shared by all of a run's parameter providers. Unset until the
/// surface rule fires; activate(k) makes params(step >= k) use the changed
/// dynamics. One instance per simulation run.
class RegimeSwitch {
 public:
  void activate(int step) { step_ = step; }
  std::optional<int> step() const { return step_; }
  bool applies_at(int step) const { return step_ && step >= *step_; }

 private:
  std::optional<int> step_;
};

/// Per-vehicle models plus the control-coordinate ensemble.
///
/// Vehicle indexing and coordinates: vehicle 1 leads the chain and drives in
/// the +s direction; followers start behind it at initial_gap spacing. Each
/// agent's estimation state is [v_i, s_i] (velocity, absolute position), which
/// is observable from that vehicle's own position measurement and keeps the
/// agents' dynamics decoupled. The control coordinates stack per-vehicle
/// blocks [v_i, gap_i] with gap_i = s_i - s_{i+1} (distance to the follower),
/// the last block being velocity-only, for a total dimension of 2N - 1.
/// `reduction` maps the stacked estimation states to the control coordinates.
struct PlatoonModel {
  PlatoonConfig config;
  std::vector<LinearModel> agents;
  Matrix ensemble_a;  // control coordinates, nominal (pre-switch) dynamics
  Matrix ensemble_b;
  Matrix reduction;
  std::shared_ptr<RegimeSwitch> regime;
};

/// Builds the platoon. Throws ConfigError for fewer than two vehicles or a
/// non-positive sample time.
PlatoonModel build_platoon_model(const PlatoonConfig& config);

}  // namespace etsim
