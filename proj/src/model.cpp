#include "etsim/model.hpp"

#include "etsim/numerics.hpp"

namespace etsim {

void validate(const SystemParams& p) {
  const auto n = p.A.rows();
  if (p.A.cols() != n) throw DimensionError("A must be square");
  if (p.B.rows() != n) throw DimensionError("B must have one row per state");
  if (p.H.cols() != n) throw DimensionError("H must have one column per state");
  if (p.Q.rows() != n || p.Q.cols() != n) throw DimensionError("Q must be n x n");
  const auto m = p.H.rows();
  if (p.R.rows() != m || p.R.cols() != m) throw DimensionError("R must be m x m");
  require_covariance(p.Q, "Q");
  require_covariance(p.R, "R");
}

LinearModel::LinearModel(SystemParams base, Vector x0_mean, Matrix x0_cov)
    : LinearModel(std::move(base), std::move(x0_mean), std::move(x0_cov), nullptr) {}

LinearModel::LinearModel(SystemParams base, Vector x0_mean, Matrix x0_cov, ParamProvider provider)
    : base_(std::move(base)),
      x0_mean_(std::move(x0_mean)),
      x0_cov_(std::move(x0_cov)),
      provider_(std::move(provider)) {
  validate(base_);
  if (x0_mean_.size() != base_.state_dim()) throw DimensionError("x0_mean must match the state dimension");
  if (x0_cov_.rows() != base_.state_dim() || x0_cov_.cols() != base_.state_dim()) {
    throw DimensionError("x0_cov must be n x n");
  }
  require_covariance(x0_cov_, "x0_cov");
}

SystemParams LinearModel::params(int step) const {
  if (!provider_) return base_;
  return provider_(step);
}

}  // namespace etsim
