#include "etsim/plant.hpp"

namespace etsim {

Vector step_true_state(const Vector& x, const Vector& u, const SystemParams& p, const Vector& process_noise) {
  if (x.size() != p.state_dim()) throw DimensionError("step_true_state: state dimension mismatch");
  if (u.size() != p.input_dim()) throw DimensionError("step_true_state: input dimension mismatch");
  if (process_noise.size() != p.state_dim()) throw DimensionError("step_true_state: noise dimension mismatch");
  return p.A * x + p.B * u + process_noise;
}

Vector step_true_state(const Vector& x, const Vector& u, const LinearModel& model, NoiseSource& noise, int step) {
  const SystemParams p = model.params(step);
  return step_true_state(x, u, p, sample_process_noise(model, p, noise));
}

Vector measure(const Vector& x, const SystemParams& p, const Vector& measurement_noise) {
  if (x.size() != p.state_dim()) throw DimensionError("measure: state dimension mismatch");
  if (measurement_noise.size() != p.output_dim()) throw DimensionError("measure: noise dimension mismatch");
  return p.H * x + measurement_noise;
}

Vector measure(const Vector& x, const LinearModel& model, NoiseSource& noise, int step) {
  const SystemParams p = model.params(step);
  return measure(x, p, sample_measurement_noise(model, p, noise));
}

Vector sample_process_noise(const LinearModel& model, const SystemParams& p, NoiseSource& noise) {
  const NoiseChannel& ch = model.process_noise;
  if (ch.kind == NoiseChannel::Kind::Gaussian) return noise.gaussian(p.Q);
  if (ch.through_input) return p.B * noise.uniform_centered(p.input_dim(), ch.half_width);
  return noise.uniform_centered(p.state_dim(), ch.half_width);
}

Vector sample_measurement_noise(const LinearModel& model, const SystemParams& p, NoiseSource& noise) {
  const NoiseChannel& ch = model.measurement_noise;
  if (ch.kind == NoiseChannel::Kind::Gaussian) return noise.gaussian(p.R);
  return noise.uniform_centered(p.output_dim(), ch.half_width);
}

namespace {

// Unit point mass sampled with zero-order hold, state [v, s].
SystemParams vehicle_params(double dt, double speed_factor, double input_factor,
                            double input_noise_half_width, double meas_noise_half_width) {
  SystemParams p;
  p.A = Matrix{{1.0, 0.0}, {speed_factor * dt, 1.0}};
  p.B = input_factor * Matrix{{dt}, {0.5 * dt * dt}};
  p.H = Matrix{{0.0, 1.0}};
  const double input_var = input_noise_half_width * input_noise_half_width / 3.0;
  p.Q = input_var * p.B * p.B.transpose();
  const double meas_var = meas_noise_half_width * meas_noise_half_width / 3.0;
  p.R = Matrix{{meas_var}};
  return p;
}

}  // namespace

PlatoonModel build_platoon_model(const PlatoonConfig& config) {
  if (config.vehicles < 2) throw ConfigError("build_platoon_model: need at least two vehicles");
  if (config.dt <= 0.0) throw ConfigError("build_platoon_model: sample time must be positive");

  PlatoonModel out;
  out.config = config;
  out.regime = std::make_shared<RegimeSwitch>();

  const int n = config.vehicles;
  const double dt = config.dt;

  const SystemParams pre =
      vehicle_params(dt, 1.0, 1.0, config.input_noise_half_width, config.measurement_noise_half_width);
  SystemParams post = pre;
  if (config.surface) {
    post = vehicle_params(dt, config.surface->speed_factor, config.surface->input_factor,
                          config.input_noise_half_width, config.measurement_noise_half_width);
  }

  const Matrix x0_cov = Vector{{config.initial_speed_sd * config.initial_speed_sd,
                                config.initial_position_sd * config.initial_position_sd}}
                            .asDiagonal();
  for (int i = 0; i < n; ++i) {
    const Vector x0_mean{{config.initial_speed, -config.initial_gap * i}};
    LinearModel::ParamProvider provider;
    if (config.surface) {
      auto regime = out.regime;
      provider = [pre, post, regime](int step) { return regime->applies_at(step) ? post : pre; };
    }
    LinearModel model = provider ? LinearModel(pre, x0_mean, x0_cov, provider)
                                 : LinearModel(pre, x0_mean, x0_cov);
    model.process_noise = {NoiseChannel::Kind::Uniform, config.input_noise_half_width, true};
    model.measurement_noise = {NoiseChannel::Kind::Uniform, config.measurement_noise_half_width, false};
    out.agents.push_back(std::move(model));
  }

  // Control coordinates: blocks [v_i, gap_i] per vehicle, last block [v_N].
  const int dim = 2 * n - 1;
  out.ensemble_a = Matrix::Zero(dim, dim);
  out.ensemble_b = Matrix::Zero(dim, n);
  auto v_index = [](int vehicle) { return 2 * vehicle; };
  auto gap_index = [](int vehicle) { return 2 * vehicle + 1; };
  for (int i = 0; i < n; ++i) {
    out.ensemble_a(v_index(i), v_index(i)) = 1.0;
    out.ensemble_b(v_index(i), i) = dt;
    if (i + 1 < n) {
      out.ensemble_a(gap_index(i), gap_index(i)) = 1.0;
      out.ensemble_a(gap_index(i), v_index(i)) = dt;
      out.ensemble_a(gap_index(i), v_index(i + 1)) = -dt;
      out.ensemble_b(gap_index(i), i) = 0.5 * dt * dt;
      out.ensemble_b(gap_index(i), i + 1) = -0.5 * dt * dt;
    }
  }

  // Stacked estimation states [v_i, s_i] -> control coordinates.
  out.reduction = Matrix::Zero(dim, 2 * n);
  for (int i = 0; i < n; ++i) {
    out.reduction(v_index(i), 2 * i) = 1.0;
    if (i + 1 < n) {
      out.reduction(gap_index(i), 2 * i + 1) = 1.0;
      out.reduction(gap_index(i), 2 * (i + 1) + 1) = -1.0;
    }
  }
  return out;
}

}  // namespace etsim
