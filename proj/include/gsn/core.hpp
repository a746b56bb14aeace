#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gsn {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using Index = Eigen::Index;

// Error taxonomy shared by every module. Each maps to one failure class
// named in the module contracts.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ShapeError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct ConvergenceError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct GraphError : Error {
  using Error::Error;
};
struct StateError : Error {
  using Error::Error;
};
struct SizeError : Error {
  using Error::Error;
};
struct FormatError : Error {
  using Error::Error;
};
struct TrainingError : Error {
  using Error::Error;
};

std::string shape_string(const Matrix& m);

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.derived().array().isFinite().all();
}

}  // namespace gsn
