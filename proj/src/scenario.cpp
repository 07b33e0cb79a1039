#include "etsim/scenario.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace etsim {

std::string to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::Event: return "et";
    case TriggerKind::Predictive: return "pt";
    case TriggerKind::Self: return "st";
  }
  throw ConfigError("unknown trigger kind");
}

TriggerKind trigger_kind_from_string(const std::string& s) {
  if (s == "et" || s == "event") return TriggerKind::Event;
  if (s == "pt" || s == "predictive") return TriggerKind::Predictive;
  if (s == "st" || s == "self") return TriggerKind::Self;
  throw ConfigError("unknown trigger kind '" + s + "' (expected et, pt, or st)");
}

Scenario builtin_scenario(const std::string& name) {
  if (name == "example1") {
    Scenario s;
    s.name = name;
    s.horizon_steps = 200;
    SystemParams p;
    p.A = Matrix{{0.98}};
    p.B = Matrix::Zero(1, 0);
    p.H = Matrix{{1.0}};
    p.Q = Matrix{{0.1}};
    p.R = Matrix{{0.1}};
    s.agents.emplace_back(p, Vector{{1.0}}, Matrix{{1.0}});
    s.trigger.kind = TriggerKind::Self;
    s.trigger.cost = 0.6;
    s.trigger.horizon_m = 2;
    return s;
  }
  if (name == "platoon10") {
    Scenario s;
    s.name = name;
    s.horizon_steps = 250;  // 25 s at 100 ms rounds
    PlatoonScenario ps;
    ps.config.vehicles = 10;
    ps.config.dt = 0.1;
    ps.config.surface = SurfaceRule{};
    s.platoon = ps;
    s.network.p_drop = 0.1;
    s.trigger.kind = TriggerKind::Predictive;
    s.trigger.horizon_m = 2;
    s.trigger.cost = 1.0;
    return s;
  }
  if (name == "platoon3-brake") {
    Scenario s;
    s.name = name;
    s.horizon_steps = 412;  // brake onset at 10 s plus the ramp to a stop
    PlatoonScenario ps;
    ps.config.vehicles = 3;
    ps.config.dt = 0.1;
    ps.brake = BrakeEvent{0, 10.0, 0.0, 1.0};
    ps.lqr_gap_weight = 400.0;
    ps.lqr_input_weight = 10.0;
    ps.leader_speed_only = true;
    s.platoon = ps;
    s.network.p_drop = 0.02;
    s.trigger.kind = TriggerKind::Predictive;
    s.trigger.horizon_m = 2;
    s.trigger.cost = 10.0;
    return s;
  }
  throw ConfigError("unknown built-in scenario '" + name + "'");
}

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ConfigError(origin + ": " + what);
}

void require_keys(const json& obj, const std::string& origin, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(origin, where + " must be an object");
  for (const auto& item : obj.items()) {
    if (!allowed.count(item.key())) fail(origin, "unknown key '" + item.key() + "' in " + where);
  }
}

double number_at(const json& obj, const std::string& origin, const std::string& key) {
  if (!obj.at(key).is_number()) fail(origin, "'" + key + "' must be a number");
  return obj.at(key).get<double>();
}

Matrix parse_matrix(const json& value, const std::string& origin, const std::string& key) {
  if (!value.is_array()) fail(origin, "'" + key + "' must be an array of rows");
  const auto rows = value.size();
  if (rows == 0) return Matrix(0, 0);
  if (!value[0].is_array()) fail(origin, "'" + key + "' rows must be arrays");
  const auto cols = value[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!value[r].is_array() || value[r].size() != cols) fail(origin, "'" + key + "' rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!value[r][c].is_number()) fail(origin, "'" + key + "' entries must be numbers");
      m(r, c) = value[r][c].get<double>();
    }
  }
  return m;
}

Vector parse_vector(const json& value, const std::string& origin, const std::string& key) {
  if (!value.is_array()) fail(origin, "'" + key + "' must be an array");
  Vector v(value.size());
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_number()) fail(origin, "'" + key + "' entries must be numbers");
    v[i] = value[i].get<double>();
  }
  return v;
}

NoiseChannel parse_noise(const json& obj, const std::string& origin, const std::string& where) {
  require_keys(obj, origin, where, {"kind", "half_width", "through_input"});
  NoiseChannel ch;
  const std::string kind = obj.at("kind").get<std::string>();
  if (kind == "gaussian") {
    ch.kind = NoiseChannel::Kind::Gaussian;
  } else if (kind == "uniform") {
    ch.kind = NoiseChannel::Kind::Uniform;
    if (!obj.contains("half_width")) fail(origin, where + ": uniform noise needs 'half_width'");
    ch.half_width = number_at(obj, origin, "half_width");
  } else {
    fail(origin, where + ": unknown noise kind '" + kind + "'");
  }
  if (obj.contains("through_input")) ch.through_input = obj.at("through_input").get<bool>();
  return ch;
}

LinearModel parse_agent(const json& obj, const std::string& origin, std::size_t index) {
  const std::string where = "agents[" + std::to_string(index) + "]";
  require_keys(obj, origin, where,
               {"A", "B", "H", "Q", "R", "x0_mean", "x0_cov", "process_noise", "measurement_noise"});
  for (const char* key : {"A", "H", "Q", "R", "x0_mean", "x0_cov"}) {
    if (!obj.contains(key)) fail(origin, where + " is missing '" + std::string(key) + "'");
  }
  SystemParams p;
  p.A = parse_matrix(obj.at("A"), origin, "A");
  p.H = parse_matrix(obj.at("H"), origin, "H");
  p.Q = parse_matrix(obj.at("Q"), origin, "Q");
  p.R = parse_matrix(obj.at("R"), origin, "R");
  p.B = obj.contains("B") ? parse_matrix(obj.at("B"), origin, "B") : Matrix::Zero(p.A.rows(), 0);
  Vector x0_mean = parse_vector(obj.at("x0_mean"), origin, "x0_mean");
  Matrix x0_cov = parse_matrix(obj.at("x0_cov"), origin, "x0_cov");
  try {
    LinearModel model(p, std::move(x0_mean), std::move(x0_cov));
    if (obj.contains("process_noise")) {
      model.process_noise = parse_noise(obj.at("process_noise"), origin, where + ".process_noise");
    }
    if (obj.contains("measurement_noise")) {
      model.measurement_noise = parse_noise(obj.at("measurement_noise"), origin, where + ".measurement_noise");
    }
    return model;
  } catch (const std::invalid_argument& e) {
    fail(origin, where + ": " + e.what());
  }
}

}  // namespace

Scenario parse_scenario_json(const std::string& text, const std::string& origin) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  require_keys(root, origin, "scenario",
               {"schema_version", "name", "horizon", "trigger", "network", "agents", "gains",
                "platoon", "override_stability_gate"});
  if (!root.contains("schema_version")) fail(origin, "missing 'schema_version'");
  if (root.at("schema_version").get<int>() != 1) fail(origin, "unsupported schema_version");

  Scenario s;
  if (root.contains("name")) s.name = root.at("name").get<std::string>();
  if (root.contains("horizon")) s.horizon_steps = root.at("horizon").get<int>();
  if (root.contains("override_stability_gate")) {
    s.override_stability_gate = root.at("override_stability_gate").get<bool>();
  }

  if (root.contains("trigger")) {
    const json& t = root.at("trigger");
    require_keys(t, origin, "trigger", {"kind", "horizon_m", "cost", "interval_cap"});
    if (t.contains("kind")) s.trigger.kind = trigger_kind_from_string(t.at("kind").get<std::string>());
    if (t.contains("horizon_m")) s.trigger.horizon_m = t.at("horizon_m").get<int>();
    if (t.contains("cost")) s.trigger.cost = number_at(t, origin, "cost");
    if (t.contains("interval_cap")) s.trigger.interval_cap = t.at("interval_cap").get<int>();
  }
  if (root.contains("network")) {
    const json& n = root.at("network");
    require_keys(n, origin, "network", {"p_drop"});
    if (n.contains("p_drop")) s.network.p_drop = number_at(n, origin, "p_drop");
  }

  if (root.contains("agents")) {
    if (!root.at("agents").is_array()) fail(origin, "'agents' must be an array");
    for (std::size_t i = 0; i < root.at("agents").size(); ++i) {
      s.agents.push_back(parse_agent(root.at("agents")[i], origin, i));
    }
  }
  if (root.contains("gains")) {
    const json& g = root.at("gains");
    if (!g.is_array()) fail(origin, "'gains' must be an array of block rows");
    std::vector<std::vector<Matrix>> blocks;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!g[i].is_array()) fail(origin, "'gains' rows must be arrays");
      std::vector<Matrix> row;
      for (std::size_t j = 0; j < g[i].size(); ++j) {
        row.push_back(parse_matrix(g[i][j], origin, "gains"));
      }
      blocks.push_back(std::move(row));
    }
    s.gains = std::move(blocks);
  }

  if (root.contains("platoon")) {
    const json& p = root.at("platoon");
    require_keys(p, origin, "platoon",
                 {"vehicles", "dt", "desired_speed", "desired_gap", "surface", "brake",
                  "input_noise_half_width", "measurement_noise_half_width", "initial_speed_sd",
                  "initial_position_sd", "lqr_speed_weight", "lqr_gap_weight", "lqr_input_weight",
                  "leader_speed_only"});
    PlatoonScenario ps;
    if (p.contains("vehicles")) ps.config.vehicles = p.at("vehicles").get<int>();
    if (p.contains("dt")) ps.config.dt = number_at(p, origin, "dt");
    if (p.contains("desired_speed")) ps.desired_speed = number_at(p, origin, "desired_speed");
    if (p.contains("desired_gap")) ps.desired_gap = number_at(p, origin, "desired_gap");
    if (p.contains("input_noise_half_width")) {
      ps.config.input_noise_half_width = number_at(p, origin, "input_noise_half_width");
    }
    if (p.contains("measurement_noise_half_width")) {
      ps.config.measurement_noise_half_width = number_at(p, origin, "measurement_noise_half_width");
    }
    if (p.contains("initial_speed_sd")) ps.config.initial_speed_sd = number_at(p, origin, "initial_speed_sd");
    if (p.contains("initial_position_sd")) {
      ps.config.initial_position_sd = number_at(p, origin, "initial_position_sd");
    }
    if (p.contains("lqr_speed_weight")) ps.lqr_speed_weight = number_at(p, origin, "lqr_speed_weight");
    if (p.contains("lqr_gap_weight")) ps.lqr_gap_weight = number_at(p, origin, "lqr_gap_weight");
    if (p.contains("lqr_input_weight")) ps.lqr_input_weight = number_at(p, origin, "lqr_input_weight");
    if (p.contains("leader_speed_only")) ps.leader_speed_only = p.at("leader_speed_only").get<bool>();
    ps.config.initial_speed = ps.desired_speed;
    ps.config.initial_gap = ps.desired_gap;
    if (p.contains("surface")) {
      const json& surf = p.at("surface");
      require_keys(surf, origin, "platoon.surface", {"position", "speed_factor", "input_factor"});
      SurfaceRule rule;
      if (surf.contains("position")) rule.trigger_position = number_at(surf, origin, "position");
      if (surf.contains("speed_factor")) rule.speed_factor = number_at(surf, origin, "speed_factor");
      if (surf.contains("input_factor")) rule.input_factor = number_at(surf, origin, "input_factor");
      ps.config.surface = rule;
    }
    if (p.contains("brake")) {
      const json& b = p.at("brake");
      require_keys(b, origin, "platoon.brake", {"agent", "at_time", "target_speed", "decel"});
      BrakeEvent ev;
      if (b.contains("agent")) ev.agent = b.at("agent").get<int>();
      if (b.contains("at_time")) ev.at_time = number_at(b, origin, "at_time");
      if (b.contains("target_speed")) ev.target_speed = number_at(b, origin, "target_speed");
      if (b.contains("decel")) ev.decel = number_at(b, origin, "decel");
      ps.brake = ev;
    }
    s.platoon = std::move(ps);
  }

  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::string& path_or_name) {
  std::ifstream in(path_or_name);
  if (!in) {
    try {
      return builtin_scenario(path_or_name);
    } catch (const ConfigError&) {
      throw ConfigError("cannot open scenario file '" + path_or_name + "' and it is not a built-in name");
    }
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_json(buf.str(), path_or_name);
}

void validate_scenario(const Scenario& s) {
  if (s.horizon_steps < 1) throw ConfigError("scenario: horizon must be at least one step");
  if (s.network.p_drop < 0.0 || s.network.p_drop > 1.0) throw ConfigError("scenario: p_drop must lie in [0, 1]");
  if (s.trigger.horizon_m < 0) throw ConfigError("scenario: trigger horizon_m must be >= 0");
  if (s.trigger.interval_cap < 1) throw ConfigError("scenario: trigger interval_cap must be >= 1");
  const bool has_agents = !s.agents.empty();
  const bool has_platoon = s.platoon.has_value();
  if (has_agents == has_platoon) {
    throw ConfigError("scenario: exactly one of 'agents' and 'platoon' is required");
  }
  if (has_platoon) {
    if (s.platoon->config.vehicles < 2) throw ConfigError("scenario: platoon needs at least two vehicles");
    if (s.platoon->config.dt <= 0.0) throw ConfigError("scenario: platoon sample time must be positive");
    if (s.platoon->brake) {
      const auto& b = *s.platoon->brake;
      if (b.agent < 0 || b.agent >= s.platoon->config.vehicles) {
        throw ConfigError("scenario: brake agent out of range");
      }
      if (b.at_time < 0.0) throw ConfigError("scenario: brake time must be non-negative");
    }
  }
  if (s.gains) {
    if (!has_agents) throw ConfigError("scenario: explicit gains require explicit agents");
    if (s.gains->size() != s.agents.size()) throw ConfigError("scenario: gains must have one row per agent");
    for (std::size_t i = 0; i < s.gains->size(); ++i) {
      if ((*s.gains)[i].size() != s.agents.size()) {
        throw ConfigError("scenario: gains must have one block per agent pair");
      }
      for (std::size_t j = 0; j < (*s.gains)[i].size(); ++j) {
        const Matrix& block = (*s.gains)[i][j];
        if (block.rows() != s.agents[i].input_dim() || block.cols() != s.agents[j].state_dim()) {
          throw ConfigError("scenario: gain block dimensions do not match the agents");
        }
      }
    }
  }
}

}  // namespace etsim
