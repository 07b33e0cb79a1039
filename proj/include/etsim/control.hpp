#pragma once

#include <functional>
#include <vector>

#include "etsim/model.hpp"

namespace etsim {

/// Coordinated state-feedback law. gain[i][j] maps agent j's state estimate
/// into agent i's input; an agent feeds back its own filter estimate and
/// model-based predictions of everyone else. Reference tracking enters as
/// input-space offsets: the public offset is common knowledge and appears in
/// every prediction, while the private offset is what an agent actually
/// applies (it differs only when a scenario injects a local reference change,
/// which then acts as a disturbance the predictors cannot anticipate).
struct ControlLaw {
  std::vector<std::vector<Matrix>> gain;
  std::function<Vector(int agent, int step)> public_offset;   // null means zero
  std::function<Vector(int agent, int step)> private_offset;  // null means public

  int agents() const { return static_cast<int>(gain.size()); }
  const Matrix& own_gain(int agent) const { return gain[agent][agent]; }
  Vector offset_public(int agent, int step) const;
  Vector offset_private(int agent, int step) const;
};

/// Identity law with no coupling and no offsets (every gain block zero).
ControlLaw zero_law(const std::vector<LinearModel>& models);

/// The peer part of agent `agent`'s input: the gain-weighted sum of the
/// other agents' predictions plus the public offset. estimates[j] must hold a
/// state vector for every peer j with a nonzero gain block.
Vector aggregate_xi(int agent, const std::vector<Vector>& estimates, const ControlLaw& law, int step);

/// u = F_own * estimate + xi.
Vector control_input(const Vector& estimate, const Vector& xi, const Matrix& own_gain);

/// Tracking form: u = F_own * (estimate - x_des) + xi.
Vector control_input(const Vector& estimate, const Vector& xi, const Matrix& own_gain,
                     const Vector& x_des);

/// Ensemble matrices of the coordinated closed loop over the stacked agent
/// states: transition = blkdiag(A_i) + blkdiag(B_i) * [gain blocks],
/// own_coupling = blkdiag(B_i gain[i][i]), peer_coupling their difference.
/// The simulated ensemble state obeys
///   x = transition * x_prev - own_coupling * local_err
///       - peer_coupling * remote_err + process_noise (+ reference terms).
struct ClosedLoopMatrices {
  Matrix transition;
  Matrix own_coupling;
  Matrix peer_coupling;
};

ClosedLoopMatrices assemble_closed_loop(const std::vector<LinearModel>& models, const ControlLaw& law,
                                        int step = 1);

}  // namespace etsim
