#pragma once

#include <vector>

#include "etsim/model.hpp"

namespace etsim {

/// Gaussian posterior belief N(mean, cov) held by an agent's local filter at
/// a given step. Value-like; freely copyable between threads.
struct GaussianBelief {
  Vector mean;
  Matrix cov;
  int step = 0;
};

/// One Kalman filter step: predict with (A, B), correct with the measurement.
/// `prev` is the posterior at step k-1, `u` the input applied over the
/// transition, `y` the measurement at step k. Uses the Joseph-form covariance
/// update. Throws NumericalError if the innovation covariance is not
/// positive definite.
GaussianBelief kf_step(const GaussianBelief& prev, const Vector& u, const Vector& y, const SystemParams& p);
GaussianBelief kf_step(const GaussianBelief& prev, const Vector& u, const Vector& y, const LinearModel& model);

/// One open-loop variance step: A P A' + Q, symmetrized.
Matrix open_loop_variance(const Matrix& cov, const SystemParams& p);
Matrix open_loop_variance(const Matrix& cov, const LinearModel& model, int step);

/// `count` composed open-loop variance steps, the first being the transition
/// into from_step + 1.
Matrix open_loop_variance_span(Matrix cov, const LinearModel& model, int from_step, int count);

/// Innovation covariance at step k given the posterior variance at k-1:
/// H A P A' H' + H Q H' + R.
Matrix innovation_variance(const Matrix& prev_posterior, const SystemParams& p);
Matrix innovation_variance(const Matrix& prev_posterior, const LinearModel& model, int step);

/// M-step-ahead predicted belief. The mean propagates through the closed loop
/// A + B*own_gain driven by the peer-input aggregates future_xi (one entry per
/// step; an empty list stands for all-zero aggregates). The covariance is the
/// composed open-loop variance. horizon = 0 returns the input belief.
GaussianBelief predict_m_steps(const GaussianBelief& belief, const std::vector<Vector>& future_xi,
                               const Matrix& own_gain, int horizon, const LinearModel& model);

/// Per-step filter variance quantities (prior, gain, innovation variance,
/// posterior), anchored at the model's initial covariance. These are
/// data-independent, so they are computed lazily and memoized; triggers read
/// future entries freely. Entries are computed with the model parameters the
/// provider reports at extension time; after a mid-run regime change, call
/// invalidate_from() so affected steps are recomputed under the new regime.
/// Owned by one agent runtime; extension is not thread-safe.
class VarianceSchedule {
 public:
  explicit VarianceSchedule(const LinearModel* model);

  struct Entry {
    Matrix prior;
    Matrix gain;
    Matrix innovation;
    Matrix posterior;
  };

  const Entry& at(int step);          // step >= 1
  const Matrix& posterior(int step);  // step >= 0; step 0 is the initial covariance
  void invalidate_from(int step);
  int extent() const { return static_cast<int>(entries_.size()); }
  const LinearModel& model() const { return *model_; }

 private:
  void extend_to(int step);

  const LinearModel* model_;
  std::vector<Entry> entries_;  // entries_[k-1] holds step k
};

}  // namespace etsim
