#pragma once

#include "etsim/types.hpp"

namespace etsim {

class LinearModel;

/// (M + M^T) / 2. Covariance updates re-apply this to suppress round-off drift.
Matrix symmetrized(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-9);

/// Symmetric and minimum eigenvalue >= -tol.
bool is_covariance(const Matrix& m, double tol = 1e-9);

/// Throws ConfigError naming `what` if the matrix fails the covariance check.
void require_covariance(const Matrix& m, const char* what, double tol = 1e-9);

/// Largest eigenvalue magnitude. Throws DimensionError for non-square input.
double spectral_radius(const Matrix& m);

Matrix matrix_power(const Matrix& m, int exponent);

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iterations = 100000;
};

/// Infinite-horizon discrete LQR gain F for u = F x minimizing
/// sum x'Qx + u'Ru, via fixed-point iteration of the Riccati recursion.
/// Requires Q >= 0 symmetric, R > 0 symmetric, (A, B) stabilizable.
/// Throws SolverError if the iteration cap is exceeded.
Matrix solve_lqr(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                 const FixedPointOptions& opt = {});

/// Fixed point of one predict+correct variance step of the Kalman filter,
/// iterated from P0. Throws SolverError on non-convergence.
Matrix steady_state_posterior_variance(const Matrix& A, const Matrix& H, const Matrix& Q,
                                       const Matrix& R, const Matrix& P0,
                                       const FixedPointOptions& opt = {});
Matrix steady_state_posterior_variance(const LinearModel& model, const FixedPointOptions& opt = {});

}  // namespace etsim
