#include "etsim/estimator.hpp"

#include <Eigen/Cholesky>

#include "etsim/numerics.hpp"

namespace etsim {

namespace {

struct Correction {
  Matrix gain;
  Matrix innovation;
};

Correction correction_at(const Matrix& prior, const SystemParams& p) {
  Correction c;
  c.innovation = symmetrized(p.H * prior * p.H.transpose() + p.R);
  Eigen::LLT<Matrix> chol(c.innovation);
  if (chol.info() != Eigen::Success) {
    throw NumericalError("kf_step: innovation covariance is not positive definite");
  }
  c.gain = chol.solve(p.H * prior).transpose();
  return c;
}

Matrix joseph_update(const Matrix& prior, const Matrix& gain, const SystemParams& p) {
  const Matrix join = Matrix::Identity(p.state_dim(), p.state_dim()) - gain * p.H;
  return symmetrized(join * prior * join.transpose() + gain * p.R * gain.transpose());
}

}  // namespace

GaussianBelief kf_step(const GaussianBelief& prev, const Vector& u, const Vector& y, const SystemParams& p) {
  if (prev.mean.size() != p.state_dim()) throw DimensionError("kf_step: belief dimension mismatch");
  if (u.size() != p.input_dim()) throw DimensionError("kf_step: input dimension mismatch");
  if (y.size() != p.output_dim()) throw DimensionError("kf_step: measurement dimension mismatch");

  const Vector prior_mean = p.A * prev.mean + p.B * u;
  const Matrix prior_cov = symmetrized(p.A * prev.cov * p.A.transpose() + p.Q);
  const Correction c = correction_at(prior_cov, p);

  GaussianBelief next;
  next.mean = prior_mean + c.gain * (y - p.H * prior_mean);
  next.cov = joseph_update(prior_cov, c.gain, p);
  next.step = prev.step + 1;
  return next;
}

GaussianBelief kf_step(const GaussianBelief& prev, const Vector& u, const Vector& y, const LinearModel& model) {
  return kf_step(prev, u, y, model.params(prev.step + 1));
}

Matrix open_loop_variance(const Matrix& cov, const SystemParams& p) {
  if (cov.rows() != p.state_dim() || cov.cols() != p.state_dim()) {
    throw DimensionError("open_loop_variance: covariance dimension mismatch");
  }
  return symmetrized(p.A * cov * p.A.transpose() + p.Q);
}

Matrix open_loop_variance(const Matrix& cov, const LinearModel& model, int step) {
  return open_loop_variance(cov, model.params(step));
}

Matrix open_loop_variance_span(Matrix cov, const LinearModel& model, int from_step, int count) {
  for (int m = 1; m <= count; ++m) {
    cov = open_loop_variance(cov, model.params(from_step + m));
  }
  return cov;
}

Matrix innovation_variance(const Matrix& prev_posterior, const SystemParams& p) {
  if (prev_posterior.rows() != p.state_dim() || prev_posterior.cols() != p.state_dim()) {
    throw DimensionError("innovation_variance: covariance dimension mismatch");
  }
  return symmetrized(p.H * (p.A * prev_posterior * p.A.transpose() + p.Q) * p.H.transpose() + p.R);
}

Matrix innovation_variance(const Matrix& prev_posterior, const LinearModel& model, int step) {
  return innovation_variance(prev_posterior, model.params(step));
}

GaussianBelief predict_m_steps(const GaussianBelief& belief, const std::vector<Vector>& future_xi,
                               const Matrix& own_gain, int horizon, const LinearModel& model) {
  if (horizon < 0) throw ConfigError("predict_m_steps: negative horizon");
  if (!future_xi.empty() && static_cast<int>(future_xi.size()) != horizon) {
    throw ConfigError("predict_m_steps: future_xi must have one entry per step");
  }
  GaussianBelief out = belief;
  for (int m = 1; m <= horizon; ++m) {
    const SystemParams p = model.params(belief.step + m);
    if (own_gain.rows() != p.input_dim() || own_gain.cols() != p.state_dim()) {
      throw DimensionError("predict_m_steps: gain dimension mismatch");
    }
    Vector input = own_gain * out.mean;
    if (!future_xi.empty()) input += future_xi[m - 1];
    out.mean = p.A * out.mean + p.B * input;
    out.cov = open_loop_variance(out.cov, p);
  }
  out.step = belief.step + horizon;
  return out;
}

VarianceSchedule::VarianceSchedule(const LinearModel* model) : model_(model) {
  if (!model_) throw ConfigError("VarianceSchedule: null model");
}

void VarianceSchedule::extend_to(int step) {
  while (static_cast<int>(entries_.size()) < step) {
    const int k = static_cast<int>(entries_.size()) + 1;
    const SystemParams p = model_->params(k);
    const Matrix& prev = posterior(k - 1);
    Entry e;
    e.prior = symmetrized(p.A * prev * p.A.transpose() + p.Q);
    const Correction c = correction_at(e.prior, p);
    e.innovation = c.innovation;
    e.gain = c.gain;
    e.posterior = joseph_update(e.prior, e.gain, p);
    entries_.push_back(std::move(e));
  }
}

const VarianceSchedule::Entry& VarianceSchedule::at(int step) {
  if (step < 1) throw ConfigError("VarianceSchedule::at: step must be >= 1");
  extend_to(step);
  return entries_[step - 1];
}

const Matrix& VarianceSchedule::posterior(int step) {
  if (step < 0) throw ConfigError("VarianceSchedule::posterior: negative step");
  if (step == 0) return model_->x0_cov();
  extend_to(step);
  return entries_[step - 1].posterior;
}

void VarianceSchedule::invalidate_from(int step) {
  if (step < 1) step = 1;
  if (static_cast<int>(entries_.size()) >= step) entries_.resize(step - 1);
}

}  // namespace etsim
