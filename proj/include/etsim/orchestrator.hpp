#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "etsim/network_sim.hpp"
#include "etsim/scenario.hpp"

namespace etsim {

/// A validated scenario with its control design finished: gain blocks,
/// reference offsets, and the design-coordinate closed loop checked against
/// the stability gate. Immutable after construction; safe to share across
/// concurrently executing runs.
struct CompiledScenario {
  Scenario scenario;
  ControlLaw law;
  bool coordinated = false;

  // Closed loop on the design coordinates (the control coordinates for the
  // platoon, the stacked agent states otherwise).
  Matrix design_transition;
  double design_spectral_radius = 0.0;

  // Platoon artifacts; empty for explicit-agent scenarios.
  Matrix reduction;            // stacked agent states -> control coordinates
  Vector reduced_reference;    // public reference in control coordinates
};

/// Validates, designs the control law (LQR for the platoon), and applies the
/// stability gate: coordinated scenarios with a design spectral radius >= 1
/// are rejected unless the scenario overrides the gate.
CompiledScenario compile_scenario(const Scenario& s);

struct AgentStepRecord {
  Vector x_true;
  Vector x_hat;
  Vector x_check;       // the agent's own copy of its outgoing prediction
  Vector u;
  Vector remote_error;  // x_true - x_check
  Vector local_error;   // x_true - x_hat
  int fired = 0;
  TriggerSignal signal;
  int last_fired = 0;
  int last_scheduled = 0;
};

struct StepRecord {
  int step = 0;
  std::vector<AgentStepRecord> agents;
  std::vector<std::vector<Vector>> copies;  // [owner][target] predictions after the round
  std::vector<int> senders;
  std::vector<std::vector<std::uint8_t>> delivered;  // [sender position][receiver]
  Vector reduced_state;  // platoon only: control coordinates of the true state
  double min_gap = 0.0;  // platoon only
};

struct SimTrace {
  TriggerKind kind = TriggerKind::Event;
  int n_agents = 0;
  int horizon = 0;
  std::vector<StepRecord> steps;             // empty when step recording is off
  std::vector<AllocationRecord> allocation;  // consumed slots with decision lead times
  Vector reduced_reference;                  // platoon only: public reference

  // Run-level aggregates, always filled.
  double comm_fraction = 0.0;         // triggers per agent-step
  double mean_sq_remote_error = 0.0;  // squared remote error per agent-step
  std::optional<double> tracking_cost;    // platoon: normalized L1 deviation
  std::optional<double> min_gap_overall;  // platoon: smallest inter-vehicle gap
  bool crashed = false;                   // platoon: some gap reached zero
};

struct RunOptions {
  bool record_steps = true;
  std::optional<int> horizon_override;
};

/// Runs one synchronous simulation. The per-step order is: plant step with
/// the previous input, measurements, filter updates, trigger evaluation,
/// broadcast of due payloads, remote-predictor steps and resets, then the
/// next control inputs. Fully determined by (scenario, kind, cost, seed).
SimTrace run_simulation(const CompiledScenario& cs, TriggerKind kind, const CostFn& cost,
                        std::uint64_t seed, const RunOptions& opt = {});
SimTrace run_simulation(const Scenario& s, TriggerKind kind, const CostFn& cost, std::uint64_t seed,
                        const RunOptions& opt = {});

enum class SweepMetric { RemoteError, TrackingCost };

struct SweepPoint {
  double cost = 0.0;
  double comm_avg = 0.0;
  double err_avg = 0.0;
  double err_std = 0.0;
  int runs = 0;
};

struct SweepSummary {
  TriggerKind kind = TriggerKind::Event;
  SweepMetric metric = SweepMetric::RemoteError;
  std::vector<SweepPoint> points;
};

/// Monte Carlo sweep over a grid of constant communication costs. Run seeds
/// are seed_base + run index (shared across cost points, so curves compare
/// under common noise); aggregation is order-independent, and `threads`
/// (0 = hardware default, 1 = serial) only changes the wall time.
SweepSummary monte_carlo_sweep(const CompiledScenario& cs, TriggerKind kind,
                               const std::vector<double>& cost_grid, int runs, int horizon,
                               std::uint64_t seed_base, SweepMetric metric = SweepMetric::RemoteError,
                               int threads = 0);

/// Normalized L1 tracking cost of a platoon run. Throws ConfigError when the
/// trace does not carry tracking data.
double performance_metric(const SimTrace& trace);

}  // namespace etsim
