#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "etsim/control.hpp"
#include "etsim/plant.hpp"

namespace etsim {

enum class TriggerKind { Event, Predictive, Self };

std::string to_string(TriggerKind kind);
TriggerKind trigger_kind_from_string(const std::string& s);

struct TriggerConfig {
  TriggerKind kind = TriggerKind::Event;
  int horizon_m = 2;       // predictive-trigger lookahead
  double cost = 0.6;
  int interval_cap = 1000; // self-trigger search cap; a capped search schedules there
};

struct NetworkConfig {
  double p_drop = 0.0;
};

/// Local reference change: the agent's own velocity reference ramps from the
/// platoon speed down to target_speed at `decel`, starting at at_time
/// (decel <= 0 makes it an instantaneous step). Private to the agent;
/// predictors keep using the public reference, so the maneuver acts as a
/// disturbance only communication can reveal.
struct BrakeEvent {
  int agent = 0;
  double at_time = 10.0;
  double target_speed = 0.0;
  double decel = 1.0;  // [m/s^2]
};

struct PlatoonScenario {
  PlatoonConfig config;
  double desired_speed = 22.2;  // [m/s]
  double desired_gap = 10.0;    // [m]
  double lqr_speed_weight = 1.0;
  double lqr_gap_weight = 1.0;
  double lqr_input_weight = 1000.0;
  // Leader-follower structure: the lead vehicle tracks the platoon speed and
  // ignores gap errors (its gain row keeps only the own-velocity feedback,
  // designed as a scalar speed loop). Followers keep the coordinated gains.
  bool leader_speed_only = false;
  std::optional<BrakeEvent> brake;
};

struct Scenario {
  std::string name = "custom";
  int horizon_steps = 200;
  TriggerConfig trigger;
  NetworkConfig network;

  // Exactly one agent source: explicit models, or a platoon specification.
  std::vector<LinearModel> agents;
  std::optional<std::vector<std::vector<Matrix>>> gains;  // explicit law blocks
  std::optional<PlatoonScenario> platoon;

  bool override_stability_gate = false;
};

/// Built-in scenarios: "example1", "platoon10", "platoon3-brake".
Scenario builtin_scenario(const std::string& name);

/// Loads a scenario from a JSON file with a strict schema: unknown keys are
/// rejected, errors name the offending key. Accepts a built-in name as well.
Scenario load_scenario(const std::string& path_or_name);

/// Parses scenario JSON text (used by load_scenario).
Scenario parse_scenario_json(const std::string& text, const std::string& origin);

/// Structural validation: agent source present, dimensions consistent,
/// probabilities in range. Throws ConfigError.
void validate_scenario(const Scenario& s);

}  // namespace etsim
