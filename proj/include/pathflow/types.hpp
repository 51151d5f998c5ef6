#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace pathflow {

// Every built-in has ambient dimension and field count at most 9 (SO(3) in R^9),
// so vectors and matrices live inline without heap traffic.
inline constexpr int kMaxDim = 9;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point was expected on the manifold but violates the constraint.
class ConstraintViolation : public Error {
 public:
  using Error::Error;
};

/// The frame fails to span the tangent space.
class EllipticityError : public Error {
 public:
  using Error::Error;
};

/// A step left the tubular neighbourhood in which the retraction is valid.
class StepSizeError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathflow
