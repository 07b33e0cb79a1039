#include "etsim/orchestrator.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>
#include <thread>

#include "etsim/numerics.hpp"
#include "etsim/plant.hpp"
#include "etsim/remote_predictor.hpp"

namespace etsim {

namespace {

bool any_nonzero(const std::vector<std::vector<Matrix>>& blocks) {
  for (const auto& row : blocks) {
    for (const auto& b : row) {
      if (b.size() != 0 && b.cwiseAbs().maxCoeff() != 0.0) return true;
    }
  }
  return false;
}

}  // namespace

CompiledScenario compile_scenario(const Scenario& s) {
  validate_scenario(s);
  CompiledScenario cs;
  cs.scenario = s;

  if (s.platoon) {
    const PlatoonScenario& ps = *s.platoon;
    PlatoonModel pm = build_platoon_model(ps.config);
    const int n = ps.config.vehicles;
    const int dim = 2 * n - 1;
    Vector state_weights(dim);
    for (int i = 0; i < n; ++i) {
      state_weights[2 * i] = ps.lqr_speed_weight;
      if (i + 1 < n) state_weights[2 * i + 1] = ps.lqr_gap_weight;
    }
    const Matrix state_weight = state_weights.asDiagonal();
    const Matrix input_weight = ps.lqr_input_weight * Matrix::Identity(n, n);
    Matrix gain = solve_lqr(pm.ensemble_a, pm.ensemble_b, state_weight, input_weight);
    if (ps.leader_speed_only) {
      const Matrix speed_gain =
          solve_lqr(Matrix{{1.0}}, Matrix{{ps.config.dt}}, Matrix{{ps.lqr_speed_weight}},
                    Matrix{{ps.lqr_input_weight}});
      gain.row(0).setZero();
      gain(0, 0) = speed_gain(0, 0);
    }
    cs.design_transition = pm.ensemble_a + pm.ensemble_b * gain;
    cs.design_spectral_radius = spectral_radius(cs.design_transition);
    cs.reduction = pm.reduction;

    Vector ref = Vector::Zero(dim);
    for (int i = 0; i < n; ++i) {
      ref[2 * i] = ps.desired_speed;
      if (i + 1 < n) ref[2 * i + 1] = ps.desired_gap;
    }
    cs.reduced_reference = ref;

    const Matrix full_gain = gain * pm.reduction;  // acts on stacked [v_i, s_i] states
    cs.law.gain.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        cs.law.gain[i].push_back(full_gain.block(i, 2 * j, 1, 2));
      }
    }
    const Vector base_offset = -(gain * ref);
    cs.law.public_offset = [base_offset](int agent, int) { return Vector(base_offset.segment(agent, 1)); };
    if (ps.brake) {
      const BrakeEvent ev = *ps.brake;
      const int brake_step = static_cast<int>(std::llround(ev.at_time / ps.config.dt));
      const double dt = ps.config.dt;
      const double start_speed = ps.desired_speed;
      // Offset column for the braking agent's own velocity reference; the
      // rest of the reference stays public.
      const Vector speed_column = gain.col(2 * ev.agent);
      cs.law.private_offset = [base_offset, speed_column, ev, brake_step, dt, start_speed](
                                  int agent, int step) {
        Vector out(base_offset.segment(agent, 1));
        if (agent == ev.agent && step >= brake_step) {
          double v_ref = ev.target_speed;
          if (ev.decel > 0.0) {
            v_ref = std::max(ev.target_speed, start_speed - ev.decel * dt * (step - brake_step));
          }
          out[0] += -speed_column[agent] * (v_ref - start_speed);
        }
        return out;
      };
    }
    cs.coordinated = true;
  } else {
    cs.law = s.gains ? ControlLaw{*s.gains, nullptr, nullptr} : zero_law(s.agents);
    cs.coordinated = any_nonzero(cs.law.gain);
    const ClosedLoopMatrices cl = assemble_closed_loop(s.agents, cs.law);
    cs.design_transition = cl.transition;
    cs.design_spectral_radius = spectral_radius(cl.transition);
  }

  if (cs.coordinated && cs.design_spectral_radius >= 1.0 && !s.override_stability_gate) {
    std::ostringstream msg;
    msg << "scenario '" << s.name << "': coordinated closed loop is not stable (spectral radius "
        << cs.design_spectral_radius << "); set override_stability_gate to run anyway";
    throw ConfigError(msg.str());
  }
  return cs;
}

namespace {

struct RunSetup {
  std::vector<LinearModel> models;
  std::shared_ptr<RegimeSwitch> regime;  // null without a surface rule
  double surface_position = 0.0;
  bool platoon = false;
};

RunSetup materialize(const CompiledScenario& cs) {
  RunSetup rs;
  if (cs.scenario.platoon) {
    PlatoonModel pm = build_platoon_model(cs.scenario.platoon->config);
    rs.models = std::move(pm.agents);
    rs.platoon = true;
    if (cs.scenario.platoon->config.surface) {
      rs.regime = pm.regime;
      rs.surface_position = cs.scenario.platoon->config.surface->trigger_position;
    }
  } else {
    rs.models = cs.scenario.agents;
  }
  return rs;
}

struct Agent {
  GaussianBelief belief;
  std::vector<Vector> copies;  // this agent's prediction of every agent (self included)
  std::unique_ptr<TriggerBook> book;
  std::unique_ptr<VarianceSchedule> schedule;
  std::vector<Matrix> response;
  int response_regime = 0;
  Vector u_prev;
  Vector xi_prev;
  Vector x_true;
  NoiseSource process_rng;
  NoiseSource meas_rng;
};

int regime_marker(const RunSetup& rs, int step) {
  return (rs.regime && rs.regime->applies_at(step)) ? 1 : 0;
}

}  // namespace

SimTrace run_simulation(const CompiledScenario& cs, TriggerKind kind, const CostFn& cost,
                        std::uint64_t seed, const RunOptions& opt) {
  RunSetup rs = materialize(cs);
  const int n_agents = static_cast<int>(rs.models.size());
  const int horizon = opt.horizon_override.value_or(cs.scenario.horizon_steps);
  if (horizon < 1) throw ConfigError("run_simulation: horizon must be at least one step");
  const int m = kind == TriggerKind::Predictive ? cs.scenario.trigger.horizon_m : 0;
  const int cap = cs.scenario.trigger.interval_cap;
  const double p_drop = cs.scenario.network.p_drop;
  const ControlLaw& law = cs.law;

  NoiseSource drop_rng(NoiseSource::derive(seed, 1));

  const int response_len = kind == TriggerKind::Self ? cap : std::max(m, 1);
  std::vector<Agent> agents;
  agents.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    Agent a{GaussianBelief{rs.models[i].x0_mean(), rs.models[i].x0_cov(), 0},
            {},
            std::make_unique<TriggerBook>(m),
            std::make_unique<VarianceSchedule>(&rs.models[i]),
            {},
            0,
            Vector(),
            Vector(),
            Vector(),
            NoiseSource(NoiseSource::derive(seed, 8 * i + 2)),
            NoiseSource(NoiseSource::derive(seed, 8 * i + 3))};
    for (int j = 0; j < n_agents; ++j) a.copies.push_back(rs.models[j].x0_mean());
    a.response = innovation_response_sequence(rs.models[i].params(1), law.own_gain(i), response_len);
    NoiseSource init_rng(NoiseSource::derive(seed, 8 * i + 4));
    a.x_true = rs.models[i].x0_mean() + init_rng.gaussian(rs.models[i].x0_cov());
    agents.push_back(std::move(a));
  }

  // Forced trigger at the first step, then warm-start bookkeeping: the
  // predictive trigger's early decisions (targets 2..m) are made before any
  // data arrives and run on the variance path alone.
  for (int i = 0; i < n_agents; ++i) {
    Agent& a = agents[i];
    switch (kind) {
      case TriggerKind::Event:
        a.book->set_decision(1, true, 1);
        break;
      case TriggerKind::Self:
        a.book->set_decision(1, true, 0);
        break;
      case TriggerKind::Predictive:
        if (m == 0) {
          a.book->set_decision(1, true, 1);
        } else {
          a.book->set_decision(1, true, 1 - m);
          const Vector no_xi = Vector::Zero(rs.models[i].input_dim());
          for (int k0 = 2 - m; k0 <= 0; ++k0) {
            predictive_decide(*a.book, k0, a.belief, a.copies[i], no_xi, *a.schedule, a.response,
                              law.own_gain(i), cost);
          }
        }
        break;
    }
  }

  // Initial control inputs (step 0).
  for (int i = 0; i < n_agents; ++i) {
    Agent& a = agents[i];
    a.xi_prev = aggregate_xi(i, a.copies, law, 0);
    a.u_prev = control_input(a.belief.mean, a.xi_prev, law.own_gain(i));
    if (law.private_offset) a.u_prev += law.offset_private(i, 0) - law.offset_public(i, 0);
  }

  SimTrace trace;
  trace.kind = kind;
  trace.n_agents = n_agents;
  trace.horizon = horizon;
  trace.reduced_reference = cs.reduced_reference;
  if (opt.record_steps) trace.steps.reserve(horizon);

  const int reduced_dim = static_cast<int>(cs.reduction.rows());
  double comm_sum = 0.0;
  double err_sum = 0.0;
  double tracking_sum = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();

  std::vector<SystemParams> params_k(n_agents);
  std::vector<std::uint8_t> fired(n_agents, 0);
  std::vector<TriggerSignal> signals(n_agents);

  for (int k = 1; k <= horizon; ++k) {
    for (int i = 0; i < n_agents; ++i) params_k[i] = rs.models[i].params(k);

    // 1. plant
    for (int i = 0; i < n_agents; ++i) {
      Agent& a = agents[i];
      a.x_true = step_true_state(a.x_true, a.u_prev, params_k[i],
                                 sample_process_noise(rs.models[i], params_k[i], a.process_rng));
    }
    // Surface rule: keyed on the lead vehicle's true absolute position; all
    // vehicles switch together from the next transition on.
    if (rs.regime && !rs.regime->step() && agents[0].x_true[1] >= rs.surface_position) {
      rs.regime->activate(k + 1);
      for (auto& a : agents) a.schedule->invalidate_from(k + 1);
    }

    // 2.-3. measurement and filter update
    for (int i = 0; i < n_agents; ++i) {
      Agent& a = agents[i];
      const Vector y = measure(a.x_true, params_k[i],
                               sample_measurement_noise(rs.models[i], params_k[i], a.meas_rng));
      a.belief = kf_step(a.belief, a.u_prev, y, params_k[i]);
    }

    // 4. trigger evaluation
    for (int i = 0; i < n_agents; ++i) {
      Agent& a = agents[i];
      const int marker = regime_marker(rs, k);
      if (marker != a.response_regime) {
        a.response = innovation_response_sequence(params_k[i], law.own_gain(i), response_len);
        a.response_regime = marker;
      }
      switch (kind) {
        case TriggerKind::Event:
          if (k == 1) {
            signals[i] = event_signal(a.belief, a.copies[i], a.xi_prev, params_k[i], law.own_gain(i));
          } else {
            signals[i] =
                event_decide(*a.book, k, a.belief, a.copies[i], a.xi_prev, params_k[i], law.own_gain(i), cost)
                    .signal;
          }
          break;
        case TriggerKind::Predictive:
          if (m == 0 && k == 1) {
            signals[i] = event_signal(a.belief, a.copies[i], a.xi_prev, params_k[i], law.own_gain(i));
          } else {
            signals[i] = predictive_decide(*a.book, k, a.belief, a.copies[i], a.xi_prev, *a.schedule,
                                           a.response, law.own_gain(i), cost)
                             .signal;
          }
          break;
        case TriggerKind::Self: {
          const int anchor = a.book->last_fired();
          signals[i] = TriggerSignal{};
          signals[i].variance_part = self_trigger_signal(anchor, k - anchor, *a.schedule, a.response);
          signals[i].total = signals[i].variance_part;
          break;
        }
      }
      fired[i] = a.book->decision(k) ? 1 : 0;
      if (fired[i]) a.book->note_fired(k);
      if (kind == TriggerKind::Self && fired[i]) {
        const SelfTriggerResult next = self_trigger_next(k, *a.schedule, a.response, cost, cap);
        for (int t = k + 1; t < k + next.interval; ++t) a.book->set_decision(t, false, k);
        a.book->set_decision(k + next.interval, true, k);
      }
    }

    // 5. broadcast of due payloads
    std::vector<int> senders;
    for (int i = 0; i < n_agents; ++i) {
      if (fired[i]) senders.push_back(i);
    }
    const BusRound round = broadcast(k, senders, n_agents, p_drop, drop_rng);

    // 6. remote predictor steps and resets
    std::vector<std::vector<Vector>> old_copies;
    old_copies.reserve(n_agents);
    for (const Agent& a : agents) old_copies.push_back(a.copies);
    for (int owner = 0; owner < n_agents; ++owner) {
      Agent& a = agents[owner];
      for (int target = 0; target < n_agents; ++target) {
        const Vector xi = aggregate_xi(target, old_copies[owner], law, k - 1);
        std::optional<Vector> received;
        if (fired[target] && round.delivered_to(target, owner)) received = agents[target].belief.mean;
        const RemoteEstimate prev{old_copies[owner][target], k - 1, target};
        a.copies[target] = remote_step(prev, xi, received, law.own_gain(target), params_k[target]).mean;
      }
    }

    // 7. control inputs for the next transition
    for (int i = 0; i < n_agents; ++i) {
      Agent& a = agents[i];
      a.xi_prev = aggregate_xi(i, a.copies, law, k);
      a.u_prev = control_input(a.belief.mean, a.xi_prev, law.own_gain(i));
      if (law.private_offset) a.u_prev += law.offset_private(i, k) - law.offset_public(i, k);
    }

    // bookkeeping and metrics
    Vector reduced;
    if (reduced_dim > 0) {
      Vector stacked(2 * n_agents);
      for (int i = 0; i < n_agents; ++i) stacked.segment(2 * i, 2) = agents[i].x_true;
      reduced = cs.reduction * stacked;
      tracking_sum += (reduced - cs.reduced_reference).cwiseAbs().sum();
      for (int i = 0; i + 1 < n_agents; ++i) min_gap = std::min(min_gap, reduced[2 * i + 1]);
    }
    for (int i = 0; i < n_agents; ++i) {
      comm_sum += fired[i];
      err_sum += (agents[i].x_true - agents[i].copies[i]).squaredNorm();
    }

    if (opt.record_steps) {
      StepRecord rec;
      rec.step = k;
      rec.senders = round.senders;
      rec.delivered = round.delivered;
      for (int i = 0; i < n_agents; ++i) {
        const Agent& a = agents[i];
        AgentStepRecord ar;
        ar.x_true = a.x_true;
        ar.x_hat = a.belief.mean;
        ar.x_check = a.copies[i];
        ar.u = a.u_prev;
        ar.remote_error = a.x_true - a.copies[i];
        ar.local_error = a.x_true - a.belief.mean;
        ar.fired = fired[i];
        ar.signal = signals[i];
        ar.last_fired = a.book->last_fired();
        ar.last_scheduled = a.book->last_scheduled();
        rec.agents.push_back(std::move(ar));
      }
      rec.copies.reserve(n_agents);
      for (int owner = 0; owner < n_agents; ++owner) rec.copies.push_back(agents[owner].copies);
      if (reduced_dim > 0) {
        rec.reduced_state = reduced;
        double step_min = std::numeric_limits<double>::infinity();
        for (int i = 0; i + 1 < n_agents; ++i) step_min = std::min(step_min, reduced[2 * i + 1]);
        rec.min_gap = step_min;
      }
      trace.steps.push_back(std::move(rec));
    }
  }

  trace.comm_fraction = comm_sum / (static_cast<double>(horizon) * n_agents);
  trace.mean_sq_remote_error = err_sum / (static_cast<double>(horizon) * n_agents);
  if (reduced_dim > 0) {
    trace.tracking_cost = tracking_sum / (static_cast<double>(reduced_dim) * horizon);
    trace.min_gap_overall = min_gap;
    trace.crashed = min_gap <= 0.0;
  }

  std::vector<const TriggerBook*> books;
  for (const Agent& a : agents) books.push_back(a.book.get());
  trace.allocation = allocation_log(books, horizon);
  return trace;
}

SimTrace run_simulation(const Scenario& s, TriggerKind kind, const CostFn& cost, std::uint64_t seed,
                        const RunOptions& opt) {
  return run_simulation(compile_scenario(s), kind, cost, seed, opt);
}

SweepSummary monte_carlo_sweep(const CompiledScenario& cs, TriggerKind kind,
                               const std::vector<double>& cost_grid, int runs, int horizon,
                               std::uint64_t seed_base, SweepMetric metric, int threads) {
  if (runs < 1) throw ConfigError("monte_carlo_sweep: need at least one run");
  if (cost_grid.empty()) throw ConfigError("monte_carlo_sweep: empty cost grid");
  if (metric == SweepMetric::TrackingCost && !cs.scenario.platoon) {
    throw ConfigError("monte_carlo_sweep: tracking metric requires a platoon scenario");
  }

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (n_threads < 1) n_threads = 1;
  n_threads = std::min(n_threads, runs);

  SweepSummary out;
  out.kind = kind;
  out.metric = metric;
  RunOptions opt;
  opt.record_steps = false;
  opt.horizon_override = horizon;

  for (double c : cost_grid) {
    std::vector<double> errs(runs, 0.0);
    std::vector<double> comms(runs, 0.0);
    const CostFn cost = constant_cost(c);
    auto work = [&](int r) {
      const SimTrace t = run_simulation(cs, kind, cost, seed_base + static_cast<std::uint64_t>(r), opt);
      comms[r] = t.comm_fraction;
      errs[r] = metric == SweepMetric::RemoteError ? t.mean_sq_remote_error : *t.tracking_cost;
    };
    if (n_threads == 1) {
      for (int r = 0; r < runs; ++r) work(r);
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      pool.reserve(n_threads);
      for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&] {
          for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) work(r);
        });
      }
      for (auto& th : pool) th.join();
    }
    SweepPoint pt;
    pt.cost = c;
    pt.runs = runs;
    for (int r = 0; r < runs; ++r) {
      pt.comm_avg += comms[r];
      pt.err_avg += errs[r];
    }
    pt.comm_avg /= runs;
    pt.err_avg /= runs;
    double var = 0.0;
    for (int r = 0; r < runs; ++r) var += (errs[r] - pt.err_avg) * (errs[r] - pt.err_avg);
    pt.err_std = runs > 1 ? std::sqrt(var / (runs - 1)) : 0.0;
    out.points.push_back(pt);
  }
  return out;
}

double performance_metric(const SimTrace& trace) {
  if (trace.reduced_reference.size() == 0) {
    throw ConfigError("performance_metric: trace carries no tracking data");
  }
  if (trace.steps.empty()) {
    if (trace.tracking_cost) return *trace.tracking_cost;
    throw ConfigError("performance_metric: trace has neither steps nor a recorded tracking cost");
  }
  const int dim = static_cast<int>(trace.reduced_reference.size());
  double sum = 0.0;
  for (const StepRecord& rec : trace.steps) {
    if (rec.reduced_state.size() != dim) {
      throw ConfigError("performance_metric: step records carry no control coordinates");
    }
    sum += (rec.reduced_state - trace.reduced_reference).cwiseAbs().sum();
  }
  return sum / (static_cast<double>(dim) * trace.steps.size());
}

}  // namespace etsim
