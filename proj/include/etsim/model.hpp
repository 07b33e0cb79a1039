#pragma once

#include <functional>

#include "etsim/types.hpp"

namespace etsim {

/// System matrices governing one step of an agent:
///   x_k = A x_{k-1} + B u_{k-1} + v_{k-1},   y_k = H x_k + w_k.
/// B may have zero columns for autonomous agents.
struct SystemParams {
  Matrix A;
  Matrix B;
  Matrix H;
  Matrix Q;
  Matrix R;

  int state_dim() const { return static_cast<int>(A.rows()); }
  int input_dim() const { return static_cast<int>(B.cols()); }
  int output_dim() const { return static_cast<int>(H.rows()); }
};

/// Throws if the matrices are dimensionally inconsistent or the covariances
/// are not symmetric positive semidefinite.
void validate(const SystemParams& p);

/// How a noise channel is sampled. Gaussian channels draw from the model's
/// Q (or R); uniform channels draw each component independently from
/// U[-half_width, half_width]. A process channel with `through_input` set is
/// sampled per input component and mapped through B, i.e. v = B * eta.
struct NoiseChannel {
  enum class Kind { Gaussian, Uniform };
  Kind kind = Kind::Gaussian;
  double half_width = 0.0;
  bool through_input = false;
};

/// A (possibly time-varying) linear agent model together with the initial
/// belief N(x0_mean, x0_cov) and the noise channel configuration.
///
/// Time variation is expressed through a parameter provider: params(k) are
/// the matrices governing the transition into step k and the measurement at
/// step k. Providers may consult shared scenario state (e.g. a regime switch
/// discovered mid-run); queries for future steps then reflect the current
/// knowledge, which is exactly what predictions should use.
class LinearModel {
 public:
  using ParamProvider = std::function<SystemParams(int step)>;

  LinearModel(SystemParams base, Vector x0_mean, Matrix x0_cov);
  LinearModel(SystemParams base, Vector x0_mean, Matrix x0_cov, ParamProvider provider);

  const SystemParams& base() const { return base_; }
  SystemParams params(int step) const;
  bool time_varying() const { return static_cast<bool>(provider_); }

  const Vector& x0_mean() const { return x0_mean_; }
  const Matrix& x0_cov() const { return x0_cov_; }

  int state_dim() const { return base_.state_dim(); }
  int input_dim() const { return base_.input_dim(); }
  int output_dim() const { return base_.output_dim(); }

  NoiseChannel process_noise;
  NoiseChannel measurement_noise;

 private:
  SystemParams base_;
  Vector x0_mean_;
  Matrix x0_cov_;
  ParamProvider provider_;
};

}  // namespace etsim
