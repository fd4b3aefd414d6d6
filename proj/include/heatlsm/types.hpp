#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace heatlsm {

using Real = double;
using Vec2 = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr const char* version_string = "0.1.0";

// Exponent beyond which the Gaussian kernel is treated as exactly zero.
inline constexpr Real kernel_exponent_cutoff = 700.0;

struct InputDomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AssemblyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace heatlsm
