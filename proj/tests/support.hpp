#pragma once

// Shared helpers for the test suites: random system generation, a
// self-contained single-agent closed-loop simulator (plant + filter + remote
// prediction with a known exogenous input aggregate), and statistical
// tolerance checks for the Monte Carlo oracles.

#include <cmath>
#include <functional>
#include <vector>

#include "etsim/estimator.hpp"
#include "etsim/model.hpp"
#include "etsim/noise.hpp"
#include "etsim/numerics.hpp"
#include "etsim/plant.hpp"

namespace etsim::test {

inline Matrix random_matrix(NoiseSource& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = scale * (2.0 * rng.uniform01() - 1.0);
  }
  return m;
}

inline Matrix random_covariance(NoiseSource& rng, int n, double scale = 1.0, double ridge = 1e-3) {
  const Matrix l = random_matrix(rng, n, n, scale);
  return symmetrized(l * l.transpose() + ridge * Matrix::Identity(n, n));
}

/// Random system with a prescribed open-loop spectral radius.
inline SystemParams random_system(NoiseSource& rng, int n, int p, int m, double radius = 0.9) {
  SystemParams sys;
  sys.A = random_matrix(rng, n, n);
  const double rho = spectral_radius(sys.A);
  if (rho > 1e-9) sys.A *= radius / rho;
  sys.B = random_matrix(rng, n, p);
  sys.H = random_matrix(rng, m, n);
  sys.Q = random_covariance(rng, n, 0.3);
  sys.R = random_covariance(rng, m, 0.3);
  return sys;
}

/// Stabilizing feedback for the system via LQR with random weights.
inline Matrix random_stabilizing_gain(NoiseSource& rng, const SystemParams& sys) {
  const int n = sys.state_dim();
  const int p = sys.input_dim();
  const Matrix q = random_covariance(rng, n, 0.5, 0.1);
  const Matrix r = random_covariance(rng, p, 0.5, 0.5);
  return solve_lqr(sys.A, sys.B, q, r);
}

/// One agent's closed loop: true process, local filter, and the model-based
/// remote prediction, with the peer-input aggregate supplied as a known
/// sequence. Copyable, so a prefix can be frozen and continuations resampled.
class SingleAgentSim {
 public:
  SingleAgentSim(LinearModel model, Matrix own_gain, std::function<Vector(int)> xi_at)
      : model_(std::move(model)), own_gain_(std::move(own_gain)), xi_at_(std::move(xi_at)) {
    belief_ = GaussianBelief{model_.x0_mean(), model_.x0_cov(), 0};
    x_ = model_.x0_mean();
    remote_ = model_.x0_mean();
    remote_prev_ = remote_;
    xi_prev_ = xi_at_(0);
    u_prev_ = own_gain_ * belief_.mean + xi_prev_;
  }

  void sample_initial_state(NoiseSource& rng) { x_ = model_.x0_mean() + rng.gaussian(model_.x0_cov()); }

  /// Redraws the true state from the current posterior. Continuations that
  /// realize a distribution conditioned on the measurement data alone must
  /// treat the state as unknown, i.e. resample it from the belief.
  void resample_state_from_posterior(NoiseSource& rng) {
    x_ = belief_.mean + rng.gaussian(belief_.cov);
  }

  /// Advances to step()+1; `fire` is the communication decision at the new step.
  void step(NoiseSource& rng, bool fire) {
    const int k = belief_.step + 1;
    const SystemParams p = model_.params(k);
    x_ = step_true_state(x_, u_prev_, p, sample_process_noise(model_, p, rng));
    const Vector y = measure(x_, model_, rng, k);
    const Vector prior_mean = p.A * belief_.mean + p.B * u_prev_;
    innovation_ = y - p.H * prior_mean;
    belief_ = kf_step(belief_, u_prev_, y, p);
    remote_prev_ = remote_;
    xi_prev_ = xi_at_(k - 1);
    remote_ = fire ? belief_.mean
                   : Vector((p.A + p.B * own_gain_) * remote_ + p.B * xi_prev_);
    const Vector xi_now = xi_at_(k);
    u_prev_ = own_gain_ * belief_.mean + xi_now;
  }

  int step_index() const { return belief_.step; }
  const Vector& x() const { return x_; }
  const GaussianBelief& belief() const { return belief_; }
  const Vector& remote() const { return remote_; }
  const Vector& remote_prev() const { return remote_prev_; }
  const Vector& xi_prev() const { return xi_prev_; }
  const Vector& u_prev() const { return u_prev_; }
  const Vector& innovation() const { return innovation_; }
  const LinearModel& model() const { return model_; }
  const Matrix& own_gain() const { return own_gain_; }
  Vector remote_error() const { return x_ - remote_; }
  Vector local_error() const { return x_ - belief_.mean; }

 private:
  LinearModel model_;
  Matrix own_gain_;
  std::function<Vector(int)> xi_at_;
  Vector x_;
  GaussianBelief belief_;
  Vector remote_;
  Vector remote_prev_;
  Vector xi_prev_;
  Vector u_prev_;
  Vector innovation_;
};

struct SampleStats {
  Vector mean;
  Matrix cov;
  int count = 0;
};

inline SampleStats sample_stats(const std::vector<Vector>& samples) {
  SampleStats s;
  s.count = static_cast<int>(samples.size());
  const int n = static_cast<int>(samples.front().size());
  s.mean = Vector::Zero(n);
  for (const auto& v : samples) s.mean += v;
  s.mean /= s.count;
  s.cov = Matrix::Zero(n, n);
  for (const auto& v : samples) {
    const Vector d = v - s.mean;
    s.cov += d * d.transpose();
  }
  s.cov /= (s.count - 1);
  return s;
}

/// |empirical - predicted| <= factor * standard error, entrywise, with the
/// standard errors taken from the predicted covariance.
inline bool mean_within(const SampleStats& s, const Vector& mean, const Matrix& cov, double factor = 3.0) {
  for (int i = 0; i < s.mean.size(); ++i) {
    const double se = std::sqrt(std::max(cov(i, i), 0.0) / s.count) + 1e-12;
    if (std::abs(s.mean[i] - mean[i]) > factor * se) return false;
  }
  return true;
}

inline bool cov_within(const SampleStats& s, const Matrix& cov, double factor = 3.0) {
  for (int i = 0; i < cov.rows(); ++i) {
    for (int j = 0; j < cov.cols(); ++j) {
      const double var = cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j);
      const double se = std::sqrt(std::max(var, 0.0) / s.count) + 1e-12;
      if (std::abs(s.cov(i, j) - cov(i, j)) > factor * se) return false;
    }
  }
  return true;
}

struct ConditionalError {
  Vector mean;
  Matrix cov;
};

/// Exact conditional distribution of the remote error `span` steps past an
/// anchor, by propagating the joint second moments of the remote error, the
/// filter/remote gap, and the filter error through the closed loop. Unlike
/// the trigger's variance form, this keeps the cross-covariance between the
/// anchor estimation error and later innovations that closed-loop feedback
/// introduces; the two agree exactly when B F = 0.
/// `initial_gap` is the filter/remote gap at the anchor (zero right after a
/// reset).
inline ConditionalError exact_error_distribution(const SystemParams& sys, const Matrix& gain,
                                                 VarianceSchedule& schedule, int anchor, int span,
                                                 const Vector& initial_gap) {
  const int n = sys.state_dim();
  const int m = sys.output_dim();
  const Matrix bf = sys.B * gain;
  const Matrix abar = sys.A + bf;

  Vector mean = Vector::Zero(3 * n);
  mean.segment(0, n) = initial_gap;
  mean.segment(n, n) = initial_gap;
  Matrix cov = Matrix::Zero(3 * n, 3 * n);
  const Matrix& p_anchor = schedule.posterior(anchor);
  cov.block(0, 0, n, n) = p_anchor;
  cov.block(0, 2 * n, n, n) = p_anchor;
  cov.block(2 * n, 0, n, n) = p_anchor;
  cov.block(2 * n, 2 * n, n, n) = p_anchor;

  Matrix noise = Matrix::Zero(n + m, n + m);
  noise.block(0, 0, n, n) = sys.Q;
  noise.block(n, n, m, m) = sys.R;

  for (int t = anchor + 1; t <= anchor + span; ++t) {
    const Matrix& l = schedule.at(t).gain;
    const Matrix join = Matrix::Identity(n, n) - l * sys.H;
    Matrix prop = Matrix::Zero(3 * n, 3 * n);
    prop.block(0, 0, n, n) = sys.A;
    prop.block(0, n, n, n) = bf;
    prop.block(n, n, n, n) = abar;
    prop.block(n, 2 * n, n, n) = l * sys.H * sys.A;
    prop.block(2 * n, 2 * n, n, n) = join * sys.A;
    Matrix drive = Matrix::Zero(3 * n, n + m);
    drive.block(0, 0, n, n) = Matrix::Identity(n, n);
    drive.block(n, 0, n, n) = l * sys.H;
    drive.block(n, n, n, m) = l;
    drive.block(2 * n, 0, n, n) = join;
    drive.block(2 * n, n, n, m) = -l;
    mean = prop * mean;
    cov = prop * cov * prop.transpose() + drive * noise * drive.transpose();
  }
  ConditionalError out;
  out.mean = mean.segment(0, n);
  out.cov = symmetrized(cov.block(0, 0, n, n));
  return out;
}

/// Example-1 model: A = 0.98, no input, H = 1, Q = R = 0.1, initial belief
/// mean 1 and variance 1.
inline LinearModel example1_model() {
  SystemParams p;
  p.A = Matrix{{0.98}};
  p.B = Matrix::Zero(1, 0);
  p.H = Matrix{{1.0}};
  p.Q = Matrix{{0.1}};
  p.R = Matrix{{0.1}};
  return LinearModel(p, Vector{{1.0}}, Matrix{{1.0}});
}

/// Same dynamics with a scalar input channel and feedback gain f.
inline LinearModel example1_with_input() {
  SystemParams p;
  p.A = Matrix{{0.98}};
  p.B = Matrix{{1.0}};
  p.H = Matrix{{1.0}};
  p.Q = Matrix{{0.1}};
  p.R = Matrix{{0.1}};
  return LinearModel(p, Vector{{1.0}}, Matrix{{1.0}});
}

/// True steady-state posterior variance of Example 1 from the closed-form
/// quadratic 0.9604 P^2 + 0.10396 P - 0.01 = 0 (independent of the solver).
inline double example1_steady_state() {
  const double a = 0.9604, b = 0.10396, c = -0.01;
  return (-b + std::sqrt(b * b - 4 * a * c)) / (2 * a);
}

}  // namespace etsim::test
