#pragma once

#include <optional>

#include "etsim/model.hpp"

namespace etsim {

/// Receiver-side model-based prediction of one agent's state. When an update
/// arrives the prediction resets to the transmitted estimate exactly;
/// otherwise it propagates through the agent's closed loop driven by the
/// shared peer-input aggregate.
struct RemoteEstimate {
  Vector mean;
  int step = 0;
  int agent = 0;
};

/// Advances the prediction by one step: received ? *received
///                                               : (A + B F_own) mean + B xi.
RemoteEstimate remote_step(const RemoteEstimate& est, const Vector& xi,
                           const std::optional<Vector>& received, const Matrix& own_gain,
                           const SystemParams& p);

}  // namespace etsim
