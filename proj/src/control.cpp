#include "etsim/control.hpp"

namespace etsim {

Vector ControlLaw::offset_public(int agent, int step) const {
  if (public_offset) return public_offset(agent, step);
  return Vector::Zero(gain[agent][agent].rows());
}

Vector ControlLaw::offset_private(int agent, int step) const {
  if (private_offset) return private_offset(agent, step);
  return offset_public(agent, step);
}

ControlLaw zero_law(const std::vector<LinearModel>& models) {
  ControlLaw law;
  law.gain.resize(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    for (std::size_t j = 0; j < models.size(); ++j) {
      law.gain[i].push_back(Matrix::Zero(models[i].input_dim(), models[j].state_dim()));
    }
  }
  return law;
}

Vector aggregate_xi(int agent, const std::vector<Vector>& estimates, const ControlLaw& law, int step) {
  if (agent < 0 || agent >= law.agents()) throw ConfigError("aggregate_xi: agent index out of range");
  if (static_cast<int>(estimates.size()) != law.agents()) {
    throw ConfigError("aggregate_xi: one estimate entry per agent required");
  }
  Vector xi = law.offset_public(agent, step);
  for (int j = 0; j < law.agents(); ++j) {
    if (j == agent) continue;
    const Matrix& block = law.gain[agent][j];
    if (block.size() == 0 || block.cwiseAbs().maxCoeff() == 0.0) continue;
    if (estimates[j].size() != block.cols()) {
      throw ConfigError("aggregate_xi: missing or mis-sized peer estimate");
    }
    xi += block * estimates[j];
  }
  return xi;
}

Vector control_input(const Vector& estimate, const Vector& xi, const Matrix& own_gain) {
  if (own_gain.cols() != estimate.size()) throw DimensionError("control_input: estimate dimension mismatch");
  if (own_gain.rows() != xi.size()) throw DimensionError("control_input: xi dimension mismatch");
  return own_gain * estimate + xi;
}

Vector control_input(const Vector& estimate, const Vector& xi, const Matrix& own_gain,
                     const Vector& x_des) {
  if (x_des.size() != estimate.size()) throw DimensionError("control_input: reference dimension mismatch");
  return control_input(estimate - x_des, xi, own_gain);
}

ClosedLoopMatrices assemble_closed_loop(const std::vector<LinearModel>& models, const ControlLaw& law,
                                        int step) {
  if (models.empty()) throw ConfigError("assemble_closed_loop: no agents");
  if (law.agents() != static_cast<int>(models.size())) {
    throw ConfigError("assemble_closed_loop: law does not cover all agents");
  }
  int total_state = 0;
  std::vector<int> offsets;
  std::vector<SystemParams> params;
  for (const auto& m : models) {
    offsets.push_back(total_state);
    params.push_back(m.params(step));
    total_state += params.back().state_dim();
  }

  ClosedLoopMatrices out;
  out.transition = Matrix::Zero(total_state, total_state);
  out.own_coupling = Matrix::Zero(total_state, total_state);
  out.peer_coupling = Matrix::Zero(total_state, total_state);
  for (std::size_t i = 0; i < models.size(); ++i) {
    const int ri = offsets[i];
    const int ni = params[i].state_dim();
    out.transition.block(ri, ri, ni, ni) = params[i].A;
    for (std::size_t j = 0; j < models.size(); ++j) {
      const Matrix& block = law.gain[i][j];
      if (block.rows() != params[i].input_dim() || block.cols() != params[j].state_dim()) {
        throw DimensionError("assemble_closed_loop: gain block dimension mismatch");
      }
      const Matrix coupling = params[i].B * block;
      out.transition.block(ri, offsets[j], ni, params[j].state_dim()) += coupling;
      if (i == j) {
        out.own_coupling.block(ri, ri, ni, ni) = coupling;
      } else {
        out.peer_coupling.block(ri, offsets[j], ni, params[j].state_dim()) = coupling;
      }
    }
  }
  return out;
}

}  // namespace etsim
