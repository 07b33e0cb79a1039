#include "etsim/trigger.hpp"

#include "etsim/numerics.hpp"

namespace etsim {

CostFn constant_cost(double c) {
  return [c](int) { return c; };
}

TriggerBook::TriggerBook(int horizon_m) : horizon_m_(horizon_m) {
  if (horizon_m < 0) throw ConfigError("TriggerBook: negative horizon");
}

void TriggerBook::set_decision(int step, bool fire, int decided_at) {
  if (step != decided_through_ + 1) {
    throw InvariantError("TriggerBook: decisions must be recorded in step order");
  }
  fire_.push_back(fire ? 1 : 0);
  decided_at_.push_back(decided_at);
  decided_through_ = step;
  if (fire) last_scheduled_ = step;
}

bool TriggerBook::decided(int step) const { return step >= 1 && step <= decided_through_; }

bool TriggerBook::decision(int step) const {
  if (!decided(step)) throw InvariantError("TriggerBook: decision not yet recorded");
  return fire_[step - 1] != 0;
}

int TriggerBook::decided_at(int step) const {
  if (!decided(step)) throw InvariantError("TriggerBook: decision not yet recorded");
  return decided_at_[step - 1];
}

void TriggerBook::note_fired(int step) {
  if (!decision(step)) throw InvariantError("TriggerBook: firing a step that was not scheduled");
  if (step <= last_fired_) throw InvariantError("TriggerBook: firing out of order");
  last_fired_ = step;
  if (last_scheduled_ < last_fired_) {
    throw InvariantError("TriggerBook: last scheduled trigger fell behind last fired");
  }
}

std::vector<Matrix> innovation_response_sequence(const SystemParams& p, const Matrix& own_gain, int m_max) {
  if (m_max < 0) throw ConfigError("innovation_response_sequence: negative length");
  if (own_gain.rows() != p.input_dim() || own_gain.cols() != p.state_dim()) {
    throw DimensionError("innovation_response_sequence: gain dimension mismatch");
  }
  const Matrix bf = p.B * own_gain;
  const Matrix abar = p.A + bf;
  std::vector<Matrix> out;
  out.reserve(m_max + 1);
  out.push_back(bf);
  Matrix abar_power = abar;  // (A + BF)^m
  for (int m = 1; m <= m_max; ++m) {
    out.push_back(p.A * out.back() + bf * abar_power);
    abar_power = abar_power * abar;
  }
  return out;
}

Matrix input_uncertainty(int anchor, int horizon, VarianceSchedule& schedule,
                         const std::vector<Matrix>& response) {
  if (horizon < 0) throw ConfigError("input_uncertainty: negative horizon");
  if (response.empty()) throw ConfigError("input_uncertainty: empty response sequence");
  const auto n = response.front().rows();
  Matrix out = Matrix::Zero(n, n);
  if (horizon <= 1) return out;
  // A zero leading weight means the feedback-through-input path is absent, so
  // every term vanishes regardless of the horizon.
  if (response.front().cwiseAbs().maxCoeff() == 0.0) return out;
  if (static_cast<int>(response.size()) < horizon - 1) {
    throw ConfigError("input_uncertainty: response sequence shorter than horizon - 1");
  }
  for (int m = 1; m <= horizon - 1; ++m) {
    const Matrix& w = response[horizon - m - 1];
    const auto& entry = schedule.at(anchor + m);
    const Matrix wl = w * entry.gain;
    out += wl * entry.innovation * wl.transpose();
  }
  return symmetrized(out);
}

ErrorDistribution error_if_sent(int step, int horizon, VarianceSchedule& schedule) {
  ErrorDistribution d;
  d.communicated = true;
  d.cov = schedule.posterior(step + horizon);
  d.mean = Vector::Zero(d.cov.rows());
  return d;
}

namespace {

struct CaseSplit {
  bool variance_only = false;  // a trigger is planned at or after the current step
  int anchor = 0;              // variance restart time
  int span = 0;                // steps from anchor to the decision target
};

CaseSplit classify(const TriggerBook& book, int step) {
  const int target = step + book.horizon();
  if (book.decided_through() != target - 1) {
    throw InvariantError("trigger: bookkeeping is not current for this decision");
  }
  const int kappa = book.last_scheduled();
  if (kappa < book.last_fired()) {
    throw InvariantError("trigger: scheduled index behind fired index");
  }
  CaseSplit cs;
  if (step > kappa) {
    cs.variance_only = false;
    cs.anchor = step;
    cs.span = book.horizon();
  } else {
    cs.variance_only = true;
    cs.anchor = kappa;
    cs.span = target - kappa;
    if (cs.span < 1 || cs.span > book.horizon()) {
      throw InvariantError("trigger: planned-trigger distance out of range");
    }
  }
  return cs;
}

Vector prediction_gap(const GaussianBelief& belief, const Vector& remote_prev, const Vector& xi_prev,
                      const SystemParams& p, const Matrix& own_gain) {
  const Matrix abar = p.A + p.B * own_gain;
  return belief.mean - abar * remote_prev - p.B * xi_prev;
}

Matrix open_loop_span_from(VarianceSchedule& schedule, const Matrix& start, int anchor, int span) {
  Matrix cov = start;
  const LinearModel& model = schedule.model();
  for (int m = 1; m <= span; ++m) cov = open_loop_variance(cov, model.params(anchor + m));
  return cov;
}

}  // namespace

ErrorDistribution error_if_not_sent(const TriggerBook& book, const GaussianBelief& belief,
                                    const Vector& remote_prev, const Vector& xi_prev,
                                    VarianceSchedule& schedule, const std::vector<Matrix>& response,
                                    const Matrix& own_gain) {
  const CaseSplit cs = classify(book, belief.step);
  ErrorDistribution d;
  d.communicated = false;
  if (cs.variance_only) {
    const Matrix base = open_loop_span_from(schedule, schedule.posterior(cs.anchor), cs.anchor, cs.span);
    d.cov = base + input_uncertainty(cs.anchor, cs.span, schedule, response);
    d.mean = Vector::Zero(d.cov.rows());
    return d;
  }
  const SystemParams p = schedule.model().params(belief.step);
  const Matrix abar = p.A + p.B * own_gain;
  d.mean = matrix_power(abar, book.horizon()) * prediction_gap(belief, remote_prev, xi_prev, p, own_gain);
  const Matrix base = open_loop_span_from(schedule, belief.cov, belief.step, book.horizon());
  d.cov = base + input_uncertainty(belief.step, book.horizon(), schedule, response);
  return d;
}

double expected_estimation_cost(const ErrorDistribution& without_update,
                                const ErrorDistribution& with_update) {
  return without_update.mean.squaredNorm() - with_update.mean.squaredNorm() +
         (without_update.cov - with_update.cov).trace();
}

namespace {

TriggerSignal components_for(const CaseSplit& cs, const GaussianBelief& belief,
                             const Vector& remote_prev, const Vector& xi_prev,
                             VarianceSchedule& schedule, const std::vector<Matrix>& response,
                             const Matrix& own_gain) {
  TriggerSignal sig;
  if (cs.variance_only) {
    const Matrix open = open_loop_span_from(schedule, schedule.posterior(cs.anchor), cs.anchor, cs.span) +
                        input_uncertainty(cs.anchor, cs.span, schedule, response);
    sig.variance_part = (open - schedule.posterior(cs.anchor + cs.span)).trace();
    sig.mean_part = 0.0;
  } else {
    const SystemParams p = schedule.model().params(belief.step);
    const Matrix abar = p.A + p.B * own_gain;
    sig.mean_part =
        (matrix_power(abar, cs.span) * prediction_gap(belief, remote_prev, xi_prev, p, own_gain)).squaredNorm();
    const Matrix open = open_loop_span_from(schedule, belief.cov, belief.step, cs.span) +
                        input_uncertainty(belief.step, cs.span, schedule, response);
    sig.variance_part = (open - schedule.posterior(belief.step + cs.span)).trace();
  }
  sig.total = sig.mean_part + sig.variance_part;
  return sig;
}

}  // namespace

TriggerSignal signal_components(const TriggerBook& book, const GaussianBelief& belief,
                                const Vector& remote_prev, const Vector& xi_prev,
                                VarianceSchedule& schedule, const std::vector<Matrix>& response,
                                const Matrix& own_gain) {
  const CaseSplit cs = classify(book, belief.step);
  return components_for(cs, belief, remote_prev, xi_prev, schedule, response, own_gain);
}

Decision predictive_decide(TriggerBook& book, int step, const GaussianBelief& belief,
                           const Vector& remote_prev, const Vector& xi_prev,
                           VarianceSchedule& schedule, const std::vector<Matrix>& response,
                           const Matrix& own_gain, const CostFn& cost) {
  const CaseSplit cs = classify(book, step);
  if (!cs.variance_only && belief.step != step) {
    throw InvariantError("predictive_decide: belief not current at the decision step");
  }
  Decision d;
  d.variance_only = cs.variance_only;
  d.delta = cs.variance_only ? cs.span : 0;
  d.signal = components_for(cs, belief, remote_prev, xi_prev, schedule, response, own_gain);
  const int target = step + book.horizon();
  d.fire = d.signal.total >= cost(target);
  book.set_decision(target, d.fire, step);
  return d;
}

TriggerSignal event_signal(const GaussianBelief& belief, const Vector& remote_prev,
                           const Vector& xi_prev, const SystemParams& p, const Matrix& own_gain) {
  TriggerSignal sig;
  sig.mean_part = prediction_gap(belief, remote_prev, xi_prev, p, own_gain).squaredNorm();
  sig.variance_part = 0.0;
  sig.total = sig.mean_part;
  return sig;
}

Decision event_decide(TriggerBook& book, int step, const GaussianBelief& belief,
                      const Vector& remote_prev, const Vector& xi_prev, const SystemParams& p,
                      const Matrix& own_gain, const CostFn& cost) {
  if (belief.step != step) throw InvariantError("event_decide: belief not current at the decision step");
  Decision d;
  d.signal = event_signal(belief, remote_prev, xi_prev, p, own_gain);
  d.fire = d.signal.total >= cost(step);
  book.set_decision(step, d.fire, step);
  return d;
}

double self_trigger_signal(int fired_at, int interval, VarianceSchedule& schedule,
                           const std::vector<Matrix>& response) {
  if (interval < 1) throw ConfigError("self_trigger_signal: interval must be >= 1");
  const Matrix open = open_loop_span_from(schedule, schedule.posterior(fired_at), fired_at, interval) +
                      input_uncertainty(fired_at, interval, schedule, response);
  return (open - schedule.posterior(fired_at + interval)).trace();
}

SelfTriggerResult self_trigger_next(int fired_at, VarianceSchedule& schedule,
                                    const std::vector<Matrix>& response, const CostFn& cost,
                                    int interval_cap) {
  if (interval_cap < 1) throw ConfigError("self_trigger_next: interval cap must be >= 1");
  const LinearModel& model = schedule.model();
  Matrix cov = schedule.posterior(fired_at);
  SelfTriggerResult r;
  for (int m = 1; m <= interval_cap; ++m) {
    cov = open_loop_variance(cov, model.params(fired_at + m));
    const Matrix open = cov + input_uncertainty(fired_at, m, schedule, response);
    r.interval = m;
    r.signal = (open - schedule.posterior(fired_at + m)).trace();
    if (r.signal >= cost(fired_at + m)) return r;
  }
  r.capped = true;
  return r;
}

}  // namespace etsim
