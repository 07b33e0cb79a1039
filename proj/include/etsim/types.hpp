#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace etsim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mismatched matrix/vector dimensions in a call.
struct DimensionError : std::invalid_argument {
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Invalid scenario, model, or call configuration.
struct ConfigError : std::invalid_argument {
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// An iterative solver hit its iteration cap without converging.
struct SolverError : std::runtime_error {
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical operation failed (e.g. a covariance lost positive definiteness).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal bookkeeping invariant violated; indicates a bug, not bad input.
struct InvariantError : std::logic_error {
  explicit InvariantError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace etsim
