#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stereocal {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

// Rotation vector: direction = axis, magnitude = angle [rad].
using RotationVector = Eigen::Vector3d;

// Image position (u, v) [px].
using PixelPoint = Eigen::Vector2d;

class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Baseline (near-)parallel to the optical axis; the rectifying row
// direction is undefined there.
class DegenerateBaseline : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

// Back-projected ray lies on the rotated principal plane; the row ratio
// has a vanishing denominator and the pair must be excluded.
class PointAtHorizon : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

class TooFewPairs : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

// Normal-equation factorization lost positive definiteness (NaN upstream).
class NumericalFailure : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

// Direction sum cancels to (near-)zero; a spherical mean is meaningless.
class DegenerateSum : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

class InsufficientVisibility : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

class ParseError : public CalibrationError {
 public:
  ParseError(const std::string& what, int line)
      : CalibrationError(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

class MissingIntrinsics : public CalibrationError {
 public:
  using CalibrationError::CalibrationError;
};

}  // namespace stereocal
