#include "etsim/noise.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace etsim {

NoiseSource::NoiseSource(std::uint64_t seed) : engine_(seed) {}

std::uint64_t NoiseSource::derive(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double NoiseSource::standard_normal() { return normal_(engine_); }

double NoiseSource::uniform01() { return unit_(engine_); }

bool NoiseSource::bernoulli(double p) {
  if (p < 0.0 || p > 1.0) throw ConfigError("bernoulli: p must lie in [0, 1]");
  return unit_(engine_) < p;
}

const Matrix& NoiseSource::factor_for(const Matrix& cov) {
  if (have_cache_ && cached_cov_.rows() == cov.rows() && cached_cov_ == cov) {
    return cached_factor_;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (cov + cov.transpose()));
  if (eig.info() != Eigen::Success) throw NumericalError("gaussian: eigendecomposition failed");
  Vector vals = eig.eigenvalues();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals[i] < -1e-9) throw NumericalError("gaussian: covariance is not positive semidefinite");
    vals[i] = std::sqrt(std::max(vals[i], 0.0));
  }
  cached_cov_ = cov;
  cached_factor_ = eig.eigenvectors() * vals.asDiagonal();
  have_cache_ = true;
  return cached_factor_;
}

Vector NoiseSource::gaussian(const Matrix& cov) {
  if (cov.rows() != cov.cols()) throw DimensionError("gaussian: covariance must be square");
  const Matrix& factor = factor_for(cov);
  Vector z(cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal_(engine_);
  return factor * z;
}

Vector NoiseSource::uniform_centered(int dim, double half_width) {
  if (dim < 0) throw DimensionError("uniform_centered: negative dimension");
  if (half_width < 0.0) throw ConfigError("uniform_centered: negative half width");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = (2.0 * unit_(engine_) - 1.0) * half_width;
  return v;
}

}  // namespace etsim
