#include "etsim/remote_predictor.hpp"

namespace etsim {

RemoteEstimate remote_step(const RemoteEstimate& est, const Vector& xi,
                           const std::optional<Vector>& received, const Matrix& own_gain,
                           const SystemParams& p) {
  RemoteEstimate next;
  next.step = est.step + 1;
  next.agent = est.agent;
  if (received) {
    if (received->size() != p.state_dim()) throw DimensionError("remote_step: received estimate dimension mismatch");
    next.mean = *received;
    return next;
  }
  if (est.mean.size() != p.state_dim()) throw DimensionError("remote_step: estimate dimension mismatch");
  if (xi.size() != p.input_dim()) throw DimensionError("remote_step: xi dimension mismatch");
  if (own_gain.rows() != p.input_dim() || own_gain.cols() != p.state_dim()) {
    throw DimensionError("remote_step: gain dimension mismatch");
  }
  next.mean = p.A * est.mean + p.B * (own_gain * est.mean + xi);
  return next;
}

}  // namespace etsim
