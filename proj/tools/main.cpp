#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "etsim/io.hpp"
#include "etsim/orchestrator.hpp"
#include "etsim/trigger.hpp"

namespace {

struct CommonArgs {
  std::string scenario = "example1";
  std::string trigger;
  int horizon_m = -1;
  double cost = -1.0;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_out = true) {
  cmd->add_option("--scenario", args.scenario, "Built-in scenario name or JSON file path");
  cmd->add_option("--trigger", args.trigger, "Trigger kind: et, pt, or st")
      ->check(CLI::IsMember({"et", "pt", "st"}));
  cmd->add_option("--horizon-m", args.horizon_m, "Predictive trigger lookahead M");
  cmd->add_option("--cost", args.cost, "Constant communication cost C");
  cmd->add_option("--seed", args.seed, "Random seed");
  if (with_out) {
    cmd->add_option("--out", args.out, "Output file path");
    cmd->add_option("--format", args.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  }
}

etsim::Scenario scenario_for(const CommonArgs& args) {
  etsim::Scenario s = etsim::load_scenario(args.scenario);
  if (!args.trigger.empty()) s.trigger.kind = etsim::trigger_kind_from_string(args.trigger);
  if (args.horizon_m >= 0) s.trigger.horizon_m = args.horizon_m;
  if (args.cost >= 0.0) s.trigger.cost = args.cost;
  return s;
}

int run_cmd(const CommonArgs& args, int horizon, bool with_allocation) {
  etsim::Scenario s = scenario_for(args);
  if (horizon > 0) s.horizon_steps = horizon;
  const etsim::CompiledScenario cs = etsim::compile_scenario(s);
  const etsim::SimTrace trace =
      etsim::run_simulation(cs, s.trigger.kind, etsim::constant_cost(s.trigger.cost), args.seed);
  std::printf("scenario=%s trigger=%s cost=%g seed=%llu steps=%d agents=%d\n", s.name.c_str(),
              etsim::to_string(s.trigger.kind).c_str(), s.trigger.cost,
              static_cast<unsigned long long>(args.seed), trace.horizon, trace.n_agents);
  std::printf("communication fraction: %s\n", etsim::format_double(trace.comm_fraction).c_str());
  std::printf("mean squared remote error: %s\n",
              etsim::format_double(trace.mean_sq_remote_error).c_str());
  if (trace.tracking_cost) {
    std::printf("tracking cost: %s\n", etsim::format_double(*trace.tracking_cost).c_str());
  }
  if (trace.min_gap_overall) {
    std::printf("minimum inter-vehicle gap: %s%s\n",
                etsim::format_double(*trace.min_gap_overall).c_str(),
                trace.crashed ? " (crash)" : "");
  }
  if (!args.out.empty()) {
    const auto format = etsim::output_format_from_string(args.format);
    etsim::emit_trace(trace, args.out, format);
    std::printf("trace written to %s\n", args.out.c_str());
    if (with_allocation) {
      const std::string alloc_path = args.out + (format == etsim::OutputFormat::Csv ? ".alloc.csv" : ".alloc.json");
      etsim::emit_allocation(trace.allocation, alloc_path, format);
      std::printf("allocation log written to %s\n", alloc_path.c_str());
    }
  }
  return 0;
}

int sweep_cmd(const CommonArgs& args, const std::vector<double>& grid, int runs, int horizon,
              int threads) {
  etsim::Scenario s = scenario_for(args);
  const etsim::CompiledScenario cs = etsim::compile_scenario(s);
  std::vector<double> cost_grid = grid;
  if (cost_grid.empty()) cost_grid = {s.trigger.cost};
  const auto metric =
      s.platoon ? etsim::SweepMetric::TrackingCost : etsim::SweepMetric::RemoteError;
  const int steps = horizon > 0 ? horizon : s.horizon_steps;
  const etsim::SweepSummary summary =
      etsim::monte_carlo_sweep(cs, s.trigger.kind, cost_grid, runs, steps, args.seed, metric, threads);
  std::printf("C,comm_avg,err_avg,err_std,runs\n");
  for (const auto& p : summary.points) {
    std::printf("%s,%s,%s,%s,%d\n", etsim::format_double(p.cost).c_str(),
                etsim::format_double(p.comm_avg).c_str(), etsim::format_double(p.err_avg).c_str(),
                etsim::format_double(p.err_std).c_str(), p.runs);
  }
  if (!args.out.empty()) {
    etsim::emit_sweep(summary, args.out, etsim::output_format_from_string(args.format));
    std::printf("sweep written to %s\n", args.out.c_str());
  }
  return 0;
}

int schedule_cmd(const CommonArgs& args, int horizon) {
  etsim::Scenario s = scenario_for(args);
  if (horizon > 0) s.horizon_steps = horizon;
  const etsim::CompiledScenario cs = etsim::compile_scenario(s);
  // Offline self-trigger schedule: variance quantities only, no data needed.
  etsim::Scenario single = s;
  const etsim::CompiledScenario ccs = etsim::compile_scenario(single);
  const etsim::SimTrace trace =
      etsim::run_simulation(ccs, etsim::TriggerKind::Self, etsim::constant_cost(s.trigger.cost), args.seed);
  std::printf("round,agent,decided_at,lead_time\n");
  for (const auto& rec : trace.allocation) {
    std::printf("%d,%d,%d,%d\n", rec.round, rec.agent, rec.decided_at, rec.lead_time);
  }
  if (!args.out.empty()) {
    etsim::emit_allocation(trace.allocation, args.out, etsim::output_format_from_string(args.format));
  }
  return 0;
}

int validate_cmd(const CommonArgs& args) {
  etsim::Scenario s = scenario_for(args);
  const etsim::CompiledScenario cs = etsim::compile_scenario(s);
  std::printf("scenario '%s': valid\n", s.name.c_str());
  std::printf("agents: %d\n",
              s.platoon ? s.platoon->config.vehicles : static_cast<int>(s.agents.size()));
  std::printf("coordinated: %s\n", cs.coordinated ? "yes" : "no");
  if (cs.coordinated) {
    std::printf("design closed-loop spectral radius: %s\n",
                etsim::format_double(cs.design_spectral_radius).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Event-, predictive-, and self-triggered remote estimation simulator"};
  app.require_subcommand(1);

  CommonArgs run_args, sweep_args, schedule_args, validate_args;
  int run_horizon = 0, sweep_horizon = 0, schedule_horizon = 0;
  std::vector<double> grid;
  int runs = 100;
  int threads = 0;

  CLI::App* run = app.add_subcommand("run", "Run one simulation and print/emit its trace");
  add_common(run, run_args);
  run->add_option("--steps", run_horizon, "Override the scenario horizon (steps)");

  CLI::App* sweep = app.add_subcommand("sweep", "Monte Carlo trade-off sweep over a cost grid");
  add_common(sweep, sweep_args);
  sweep->add_option("--cost-grid", grid, "Cost grid values")->expected(-1);
  sweep->add_option("--runs", runs, "Runs per cost point");
  sweep->add_option("--steps", sweep_horizon, "Override the scenario horizon (steps)");
  sweep->add_option("--threads", threads, "Worker threads (0 = hardware default)");

  CLI::App* schedule = app.add_subcommand("schedule", "Print the offline self-trigger schedule");
  add_common(schedule, schedule_args);
  schedule->add_option("--steps", schedule_horizon, "Schedule horizon (steps)");

  CLI::App* validate = app.add_subcommand("validate", "Validate a scenario and print a summary");
  add_common(validate, validate_args, /*with_out=*/false);

  try {
    app.parse(argc, argv);
    if (run->parsed()) return run_cmd(run_args, run_horizon, true);
    if (sweep->parsed()) return sweep_cmd(sweep_args, grid, runs, sweep_horizon, threads);
    if (schedule->parsed()) return schedule_cmd(schedule_args, schedule_horizon);
    if (validate->parsed()) return validate_cmd(validate_args);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const etsim::ConfigError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const etsim::DimensionError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
