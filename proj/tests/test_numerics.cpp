#include <doctest.h>

#include "etsim/numerics.hpp"
#include "etsim/plant.hpp"
#include "support.hpp"

using namespace etsim;

TEST_CASE("lqr: deadbeat open loop needs no feedback") {
  const Matrix f = solve_lqr(Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}});
  CHECK(std::abs(f(0, 0)) < 1e-12);
}

TEST_CASE("lqr: scalar unit system hits the golden-ratio fixed point") {
  const Matrix f = solve_lqr(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}});
  const double expected = (1.0 - std::sqrt(5.0)) / 2.0;  // -1/phi
  CHECK(f(0, 0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(f(0, 0) == doctest::Approx(-0.618034).epsilon(1e-5));
}

TEST_CASE("lqr: platoon ensemble gain stabilizes the closed loop") {
  const PlatoonModel pm = build_platoon_model(PlatoonConfig{.vehicles = 3, .dt = 0.1});
  const int dim = static_cast<int>(pm.ensemble_a.rows());
  const Matrix f = solve_lqr(pm.ensemble_a, pm.ensemble_b, Matrix::Identity(dim, dim),
                             1000.0 * Matrix::Identity(3, 3));
  CHECK(spectral_radius(pm.ensemble_a + pm.ensemble_b * f) < 1.0);
}

TEST_CASE("lqr: input errors") {
  CHECK_THROWS_AS(solve_lqr(Matrix::Identity(2, 3), Matrix::Identity(2, 1), Matrix::Identity(2, 2),
                            Matrix::Identity(1, 1)),
                  DimensionError);
  // R merely PSD is rejected
  CHECK_THROWS_AS(solve_lqr(Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{1.0}}, Matrix{{0.0}}), ConfigError);
  // uncontrollable unstable system cannot converge
  FixedPointOptions opt;
  opt.max_iterations = 200;
  CHECK_THROWS_AS(solve_lqr(Matrix{{2.0}}, Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{1.0}}, opt),
                  SolverError);
}

TEST_CASE("lqr: random stabilizable systems end up stable") {
  NoiseSource rng(1234);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 5);  // 2..6
    const int p = 1 + static_cast<int>(rng.uniform01() * n);
    SystemParams sys = test::random_system(rng, n, p, n, 0.4 + rng.uniform01());
    const Matrix q = test::random_covariance(rng, n, 0.5, 1e-2);
    const Matrix r = test::random_covariance(rng, p, 0.5, 0.5);
    const Matrix f = solve_lqr(sys.A, sys.B, q, r);
    CHECK(spectral_radius(sys.A + sys.B * f) < 1.0);
  }
}

TEST_CASE("steady-state posterior variance: Example 1") {
  const LinearModel model = test::example1_model();
  const Matrix pbar = steady_state_posterior_variance(model);
  CHECK(pbar(0, 0) == doctest::Approx(test::example1_steady_state()).epsilon(1e-9));
  CHECK(pbar(0, 0) == doctest::Approx(0.061392).epsilon(1e-3));
}

TEST_CASE("steady-state posterior variance: memoryless closed form") {
  const double q = 0.37, r = 2.1;
  const Matrix pbar = steady_state_posterior_variance(Matrix{{0.0}}, Matrix{{1.0}}, Matrix{{q}},
                                                      Matrix{{r}}, Matrix{{1.0}});
  CHECK(pbar(0, 0) == doctest::Approx(q * r / (q + r)).epsilon(1e-10));
}

TEST_CASE("steady-state posterior variance: perfect measurement limit") {
  const Matrix a = Matrix{{0.9, 0.1}, {0.0, 0.8}};
  const Matrix pbar = steady_state_posterior_variance(a, Matrix::Identity(2, 2),
                                                      0.2 * Matrix::Identity(2, 2),
                                                      1e-12 * Matrix::Identity(2, 2),
                                                      Matrix::Identity(2, 2));
  CHECK(pbar.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("steady-state posterior variance: fixed point, symmetric PSD") {
  NoiseSource rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 4);
    SystemParams sys = test::random_system(rng, n, 1, n, 0.5 + 0.6 * rng.uniform01());
    const Matrix pbar =
        steady_state_posterior_variance(sys.A, sys.H, sys.Q, sys.R, Matrix::Identity(n, n));
    CHECK(is_covariance(pbar));
    // one more predict+correct step stays put
    const Matrix prior = sys.A * pbar * sys.A.transpose() + sys.Q;
    const Matrix innov = sys.H * prior * sys.H.transpose() + sys.R;
    const Matrix gain = innov.ldlt().solve(sys.H * prior).transpose();
    const Matrix join = Matrix::Identity(n, n) - gain * sys.H;
    const Matrix next = join * prior * join.transpose() + gain * sys.R * gain.transpose();
    CHECK((next - pbar).cwiseAbs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("spectral radius: fixed examples") {
  CHECK(spectral_radius(Matrix::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-10));
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 0.5;
  d(1, 1) = -0.9;
  CHECK(spectral_radius(d) == doctest::Approx(0.9).epsilon(1e-10));
  CHECK_THROWS_AS(spectral_radius(Matrix::Zero(2, 3)), DimensionError);
}

TEST_CASE("spectral radius: similarity invariance") {
  NoiseSource rng(5150);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 4);
    const Matrix m = test::random_matrix(rng, n, n, 2.0);
    // well-conditioned transform: orthogonal factor times a bounded diagonal
    const Matrix g = test::random_matrix(rng, n, n);
    const Eigen::HouseholderQR<Matrix> qr(g);
    Matrix qmat = qr.householderQ();
    Vector scales(n);
    for (int i = 0; i < n; ++i) scales[i] = 0.5 + 1.5 * rng.uniform01();
    const Matrix t = qmat * Matrix(scales.asDiagonal());
    const Matrix sim = t * m * t.inverse();
    CHECK(spectral_radius(m) == doctest::Approx(spectral_radius(sim)).epsilon(1e-6));
  }
}

TEST_CASE("covariance checks") {
  CHECK(is_covariance(Matrix::Identity(2, 2)));
  CHECK_FALSE(is_covariance(Matrix{{1.0, 0.5}, {0.4, 1.0}}));
  Matrix neg = Matrix::Identity(2, 2);
  neg(1, 1) = -0.5;
  CHECK_FALSE(is_covariance(neg));
  CHECK_THROWS_AS(require_covariance(neg, "Q"), ConfigError);
}
