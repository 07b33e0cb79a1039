#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "etsim/estimator.hpp"

namespace etsim {

using CostFn = std::function<double(int step)>;
CostFn constant_cost(double c);

/// Per-agent communication bookkeeping: the decision history, when each
/// decision was made, the last fired trigger and the last scheduled one
/// (which may lie in the future). Decisions are entered strictly in step
/// order; the last scheduled index never falls below the last fired index.
class TriggerBook {
 public:
  explicit TriggerBook(int horizon_m);

  int horizon() const { return horizon_m_; }

  /// Records the decision for `step`, made at time `decided_at`. Steps must
  /// be decided in order, exactly once.
  void set_decision(int step, bool fire, int decided_at);

  bool decided(int step) const;
  bool decision(int step) const;
  int decided_at(int step) const;
  int decided_through() const { return decided_through_; }

  /// Marks a scheduled trigger as executed.
  void note_fired(int step);

  int last_fired() const { return last_fired_; }
  int last_scheduled() const { return last_scheduled_; }

 private:
  int horizon_m_ = 0;
  int decided_through_ = 0;
  int last_fired_ = 0;
  int last_scheduled_ = 0;
  std::vector<std::int8_t> fire_;
  std::vector<int> decided_at_;
};

/// Conditional distribution of the remote estimation error at a future step.
struct ErrorDistribution {
  Vector mean;
  Matrix cov;
  bool communicated = false;
};

/// Weights of future innovations inside the open-loop estimate prediction:
/// W_0 = B F, W_m = A W_{m-1} + B F (A + B F)^m. All zero when B or F is.
std::vector<Matrix> innovation_response_sequence(const SystemParams& p, const Matrix& own_gain, int m_max);

/// Extra prediction covariance caused by not knowing future inputs exactly:
/// sum_{m=1}^{horizon-1} W_{horizon-m-1} L_{anchor+m} S_{anchor+m} L' W'
/// with L and S the filter gain and innovation covariance. Exactly zero for
/// horizon <= 1 or an all-zero response sequence.
Matrix input_uncertainty(int anchor, int horizon, VarianceSchedule& schedule,
                         const std::vector<Matrix>& response);

/// Error distribution when the update at step + horizon is sent: zero mean,
/// covariance equal to the filter posterior variance there.
ErrorDistribution error_if_sent(int step, int horizon, VarianceSchedule& schedule);

/// Error distribution when the update at belief.step + horizon is not sent.
/// With no trigger planned inside the horizon the mean is the propagated gap
/// between the local estimate and the remote prediction and the covariance is
/// the open-loop prediction variance plus the input-uncertainty term; with a
/// trigger planned at kappa the mean is zero and the variance restarts there.
ErrorDistribution error_if_not_sent(const TriggerBook& book, const GaussianBelief& belief,
                                    const Vector& remote_prev, const Vector& xi_prev,
                                    VarianceSchedule& schedule, const std::vector<Matrix>& response,
                                    const Matrix& own_gain);

/// Expected cost difference E[|e|^2 without update] - E[|e|^2 with update]
/// = |mean_nc|^2 - |mean_c|^2 + trace(cov_nc - cov_c).
double expected_estimation_cost(const ErrorDistribution& without_update,
                                const ErrorDistribution& with_update);

/// The triggering signal split into its measurement-driven and
/// variance-driven parts; total is their sum and equals the expected
/// estimation cost of the pending decision.
struct TriggerSignal {
  double total = 0.0;
  double mean_part = 0.0;
  double variance_part = 0.0;
};

/// Signal components for the decision about step + horizon made at
/// belief.step (the predictive trigger's pending decision).
TriggerSignal signal_components(const TriggerBook& book, const GaussianBelief& belief,
                                const Vector& remote_prev, const Vector& xi_prev,
                                VarianceSchedule& schedule, const std::vector<Matrix>& response,
                                const Matrix& own_gain);

struct Decision {
  bool fire = false;
  TriggerSignal signal;
  bool variance_only = false;  // decision taken on the variance path alone
  int delta = 0;               // steps from the planned trigger to the decision target
};

/// Predictive trigger: decides the communication at step + horizon and
/// records it in the book. Ties fire (signal >= cost).
Decision predictive_decide(TriggerBook& book, int step, const GaussianBelief& belief,
                           const Vector& remote_prev, const Vector& xi_prev,
                           VarianceSchedule& schedule, const std::vector<Matrix>& response,
                           const Matrix& own_gain, const CostFn& cost);

/// Event trigger: instantaneous decision at `step` from the squared gap
/// between the local estimate and the remote prediction.
Decision event_decide(TriggerBook& book, int step, const GaussianBelief& belief,
                      const Vector& remote_prev, const Vector& xi_prev, const SystemParams& p,
                      const Matrix& own_gain, const CostFn& cost);

/// The event trigger's signal without recording a decision (diagnostics,
/// e.g. for the forced first-step trigger).
TriggerSignal event_signal(const GaussianBelief& belief, const Vector& remote_prev,
                           const Vector& xi_prev, const SystemParams& p, const Matrix& own_gain);

struct SelfTriggerResult {
  int interval = 0;    // steps from the firing time to the next trigger
  bool capped = false;  // no interval within the cap qualified
  double signal = 0.0;  // variance signal at the chosen interval
};

/// Self trigger: at a firing time, finds the smallest interval whose
/// variance signal reaches the cost. Searches up to interval_cap.
SelfTriggerResult self_trigger_next(int fired_at, VarianceSchedule& schedule,
                                    const std::vector<Matrix>& response, const CostFn& cost,
                                    int interval_cap);

/// Variance signal of the self trigger at `interval` steps past `fired_at`.
double self_trigger_signal(int fired_at, int interval, VarianceSchedule& schedule,
                           const std::vector<Matrix>& response);

}  // namespace etsim
