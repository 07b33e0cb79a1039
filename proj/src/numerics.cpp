#include "etsim/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "etsim/model.hpp"

namespace etsim {

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= tol;
}

bool is_covariance(const Matrix& m, double tol) {
  if (!is_symmetric(m, tol)) return false;
  if (m.rows() == 0) return true;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(m), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff() >= -tol;
}

void require_covariance(const Matrix& m, const char* what, double tol) {
  if (!is_covariance(m, tol)) {
    throw ConfigError(std::string(what) + " must be symmetric positive semidefinite");
  }
}

double spectral_radius(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("spectral_radius: matrix must be square");
  if (m.rows() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(m, /*computeEigenvectors=*/false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

Matrix matrix_power(const Matrix& m, int exponent) {
  if (m.rows() != m.cols()) throw DimensionError("matrix_power: matrix must be square");
  if (exponent < 0) throw ConfigError("matrix_power: negative exponent");
  Matrix out = Matrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < exponent; ++i) out = out * m;
  return out;
}

namespace {

bool converged(const Matrix& next, const Matrix& prev, double tol) {
  const double scale = std::max(1.0, next.cwiseAbs().maxCoeff());
  return (next - prev).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace

Matrix solve_lqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                 const FixedPointOptions& opt) {
  const auto n = A.rows();
  if (A.cols() != n) throw DimensionError("solve_lqr: A must be square");
  if (B.rows() != n) throw DimensionError("solve_lqr: B row count must match A");
  if (Q.rows() != n || Q.cols() != n) throw DimensionError("solve_lqr: Q must be n x n");
  if (R.rows() != B.cols() || R.cols() != B.cols()) throw DimensionError("solve_lqr: R must be p x p");
  require_covariance(Q, "solve_lqr: Q");
  if (!is_symmetric(R)) throw ConfigError("solve_lqr: R must be symmetric");
  Eigen::LLT<Matrix> r_chol(symmetrized(R));
  if (r_chol.info() != Eigen::Success) throw ConfigError("solve_lqr: R must be positive definite");

  Matrix P = symmetrized(Q);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Matrix btp = B.transpose() * P;
    const Matrix gain_den = R + btp * B;
    const Matrix gain_num = btp * A;
    const Matrix K = gain_den.ldlt().solve(gain_num);  // u = -K x
    Matrix next = symmetrized(Q + A.transpose() * P * A - A.transpose() * P * B * K);
    if (converged(next, P, opt.tol)) {
      return -gain_den.ldlt().solve(gain_num);
    }
    P = std::move(next);
  }
  throw SolverError("solve_lqr: Riccati iteration did not converge");
}

Matrix steady_state_posterior_variance(const Matrix& A, const Matrix& H, const Matrix& Q,
                                       const Matrix& R, const Matrix& P0,
                                       const FixedPointOptions& opt) {
  const auto n = A.rows();
  if (A.cols() != n) throw DimensionError("steady_state_posterior_variance: A must be square");
  if (H.cols() != n) throw DimensionError("steady_state_posterior_variance: H column count must match A");
  Matrix P = symmetrized(P0);
  const Matrix imat = Matrix::Identity(n, n);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Matrix prior = symmetrized(A * P * A.transpose() + Q);
    const Matrix innov = symmetrized(H * prior * H.transpose() + R);
    const Matrix gain = innov.ldlt().solve(H * prior).transpose();
    const Matrix join = imat - gain * H;
    Matrix next = symmetrized(join * prior * join.transpose() + gain * R * gain.transpose());
    if (converged(next, P, opt.tol)) return next;
    P = std::move(next);
  }
  throw SolverError("steady_state_posterior_variance: variance recursion did not converge");
}

Matrix steady_state_posterior_variance(const LinearModel& model, const FixedPointOptions& opt) {
  const SystemParams p = model.params(1);
  return steady_state_posterior_variance(p.A, p.H, p.Q, p.R, model.x0_cov(), opt);
}

}  // namespace etsim
