#pragma once

#include <cstdint>
#include <random>

#include "etsim/types.hpp"

namespace etsim {

/// Seeded pseudo-random stream. Identical seed gives an identical sample
/// sequence. Single-owner: one NoiseSource per Monte Carlo run and channel,
/// never shared across threads.
class NoiseSource {
 public:
  explicit NoiseSource(std::uint64_t seed);

  /// Deterministically derives an independent substream seed.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

  double standard_normal();
  double uniform01();
  bool bernoulli(double p);

  /// Sample from N(0, cov). cov must be symmetric PSD.
  Vector gaussian(const Matrix& cov);

  /// Per-component uniform on [-half_width, half_width].
  Vector uniform_centered(int dim, double half_width);

 private:
  const Matrix& factor_for(const Matrix& cov);

  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
  Matrix cached_cov_;
  Matrix cached_factor_;
  bool have_cache_ = false;
};

}  // namespace etsim
