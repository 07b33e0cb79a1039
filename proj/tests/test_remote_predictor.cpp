#include <doctest.h>

#include "etsim/orchestrator.hpp"
#include "etsim/remote_predictor.hpp"
#include "support.hpp"

using namespace etsim;

TEST_CASE("remote_step: a received update resets exactly") {
  const SystemParams p = test::example1_model().base();
  const RemoteEstimate est{Vector{{-3.0}}, 4, 0};
  const RemoteEstimate next = remote_step(est, Vector(0), Vector{{0.7}}, Matrix::Zero(0, 1), p);
  CHECK(next.mean[0] == 0.7);
  CHECK(next.step == 5);
}

TEST_CASE("remote_step: open-loop prediction without input") {
  const SystemParams p = test::example1_model().base();
  const RemoteEstimate est{Vector{{1.0}}, 0, 0};
  const RemoteEstimate next = remote_step(est, Vector(0), std::nullopt, Matrix::Zero(0, 1), p);
  CHECK(next.mean[0] == doctest::Approx(0.98).epsilon(1e-12));
}

TEST_CASE("remote_step: closed loop with aggregate") {
  const SystemParams p = test::example1_with_input().base();
  const RemoteEstimate est{Vector{{1.0}}, 0, 0};
  const RemoteEstimate next = remote_step(est, Vector{{0.1}}, std::nullopt, Matrix{{-0.5}}, p);
  CHECK(next.mean[0] == doctest::Approx(0.58).epsilon(1e-12));  // 0.48 * 1 + 0.1
}

TEST_CASE("remote_step: dimension errors") {
  const SystemParams p = test::example1_with_input().base();
  const RemoteEstimate est{Vector{{1.0, 2.0}}, 0, 0};
  CHECK_THROWS_AS(remote_step(est, Vector{{0.1}}, std::nullopt, Matrix{{-0.5}}, p), DimensionError);
}

namespace {

Scenario two_agent_scenario() {
  Scenario s;
  s.name = "pair";
  s.horizon_steps = 60;
  SystemParams p;
  p.A = Matrix{{0.95}};
  p.B = Matrix{{1.0}};
  p.H = Matrix{{1.0}};
  p.Q = Matrix{{0.05}};
  p.R = Matrix{{0.05}};
  s.agents.emplace_back(p, Vector{{1.0}}, Matrix{{0.5}});
  s.agents.emplace_back(p, Vector{{-1.0}}, Matrix{{0.5}});
  std::vector<std::vector<Matrix>> gains{{Matrix{{-0.3}}, Matrix{{0.1}}},
                                         {Matrix{{0.1}}, Matrix{{-0.3}}}};
  s.gains = gains;
  return s;
}

}  // namespace

TEST_CASE("synchrony: every copy of an agent agrees when nothing is dropped") {
  const Scenario s = two_agent_scenario();
  const SimTrace trace = run_simulation(s, TriggerKind::Predictive, constant_cost(0.2), 11);
  for (const StepRecord& rec : trace.steps) {
    for (int target = 0; target < trace.n_agents; ++target) {
      for (int owner = 1; owner < trace.n_agents; ++owner) {
        CHECK(rec.copies[owner][target][0] == rec.copies[0][target][0]);  // bit-exact
      }
    }
  }
}

TEST_CASE("always communicating makes the remote error the filter error") {
  const Scenario s = two_agent_scenario();
  const SimTrace trace = run_simulation(s, TriggerKind::Event, constant_cost(0.0), 5);
  CHECK(trace.comm_fraction == 1.0);
  for (const StepRecord& rec : trace.steps) {
    for (const AgentStepRecord& a : rec.agents) {
      CHECK((a.remote_error - a.local_error).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("never communicating after the start leaves a pure power iteration") {
  // single autonomous agent, huge cost: only the forced start trigger fires
  Scenario s;
  s.horizon_steps = 20;
  SystemParams p = test::example1_model().base();
  s.agents.emplace_back(p, Vector{{1.0}}, Matrix{{1.0}});
  const SimTrace trace = run_simulation(s, TriggerKind::Event, constant_cost(1e9), 3);
  const double hat1 = trace.steps[0].agents[0].x_hat[0];
  for (std::size_t i = 1; i < trace.steps.size(); ++i) {
    const double expected = std::pow(0.98, static_cast<double>(i)) * hat1;
    CHECK(trace.steps[i].agents[0].x_check[0] == doctest::Approx(expected).epsilon(1e-12));
  }
}
