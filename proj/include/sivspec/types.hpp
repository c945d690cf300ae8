#pragma once

#include <Eigen/Dense>
#include <complex>
#include <map>
#include <stdexcept>
#include <string>

namespace sivspec {

using Real = double;
using Complex = std::complex<Real>;

using ArrayX = Eigen::ArrayXd;
using VectorX = Eigen::VectorXd;
using MatrixX = Eigen::MatrixXd;
using Matrix3c = Eigen::Matrix3cd;
using Vector3c = Eigen::Vector3cd;

// Raised when an iterative scheme (quadrature, linear solve, optimizer)
// cannot reach its accuracy target.  Carries a human-readable diagnostic.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for structurally invalid inputs: bad config values, malformed
// data files, precondition violations.
class ConfigError : public std::invalid_argument {
public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace sivspec
