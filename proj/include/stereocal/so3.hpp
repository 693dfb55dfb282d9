#pragma once

#include <algorithm>
#include <cmath>

#include "stereocal/types.hpp"

namespace stereocal {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Below this angle exp/log switch to series expansions of the Rodrigues
// coefficients; keeps relative error < 1e-12 without cancellation.
inline constexpr double kSmallAngle = 1e-8;

// Skew-symmetric matrix with hat(v) * w == v x w.
inline Mat3 hat(const Vec3& v) {
  Mat3 s;
  // clang-format off
  s <<      0.0, -v.z(),  v.y(),
        v.z(),      0.0, -v.x(),
       -v.y(),  v.x(),      0.0;
  // clang-format on
  return s;
}

// Rodrigues formula R = I + a*W + b*W^2 with W = hat(theta).
inline Mat3 exp_so3(const RotationVector& theta) {
  const double angle2 = theta.squaredNorm();
  const double angle = std::sqrt(angle2);
  double a, b;
  if (angle < kSmallAngle) {
    a = 1.0 - angle2 / 6.0;
    b = 0.5 - angle2 / 24.0;
  } else {
    a = std::sin(angle) / angle;
    b = (1.0 - std::cos(angle)) / angle2;
  }
  const Mat3 w = hat(theta);
  return Mat3::Identity() + a * w + b * (w * w);
}

struct AxisAngle {
  Vec3 axis = Vec3::UnitZ();  // unit norm
  double angle = 0.0;         // in [0, pi]
  // Angle below kSmallAngle: the axis is unobservable and set to the
  // UnitZ fallback. Consumers averaging axes must skip flagged entries.
  bool degenerate = false;
};

namespace detail {

// Axis for angles near pi, where the antisymmetric part of R vanishes.
// Recovers v v^T = (R + R^T - (tr - 1) I) / (3 - tr), takes the dominant
// diagonal, and fixes the sign from the antisymmetric part when it still
// carries signal, otherwise by making the largest-magnitude component
// positive (deterministic at exactly pi).
inline Vec3 axis_near_pi(const Mat3& r, double trace) {
  const Mat3 outer =
      (r + r.transpose() - (trace - 1.0) * Mat3::Identity()) / (3.0 - trace);
  int k = 0;
  outer.diagonal().maxCoeff(&k);
  Vec3 v = Vec3::Zero();
  v[k] = std::sqrt(std::max(outer(k, k), 0.0));
  for (int j = 0; j < 3; ++j) {
    if (j != k) v[j] = outer(k, j) / v[k];
  }
  v.normalize();
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  const double s = w.dot(v);
  if (std::abs(s) > 1e-12) return s < 0.0 ? Vec3(-v) : v;
  int m = 0;
  v.cwiseAbs().maxCoeff(&m);
  return v[m] < 0.0 ? Vec3(-v) : v;
}

}  // namespace detail

namespace detail {

// Near pi the trace-based angle degrades as eps / sin(angle); the
// antisymmetric part gives sin(angle) directly and stays well conditioned.
inline double angle_near_pi(const Vec3& w) {
  return kPi - std::asin(std::min(0.5 * w.norm(), 1.0));
}

}  // namespace detail

// Canonical rotation vector with magnitude in [0, pi].
inline RotationVector log_so3(const Mat3& r) {
  const double trace = r.trace();
  const double c = std::clamp((trace - 1.0) * 0.5, -1.0, 1.0);
  const double angle = std::acos(c);
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (angle < kSmallAngle) return 0.5 * w;
  if (angle > kPi - 1e-2) {
    return detail::angle_near_pi(w) * detail::axis_near_pi(r, trace);
  }
  return (0.5 * angle / std::sin(angle)) * w;
}

inline AxisAngle axis_angle(const Mat3& r) {
  const double trace = r.trace();
  const double c = std::clamp((trace - 1.0) * 0.5, -1.0, 1.0);
  const double angle = std::acos(c);
  if (angle < kSmallAngle) return {Vec3::UnitZ(), 0.0, true};
  const Vec3 w(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  if (angle > kPi - 1e-2) {
    return {detail::axis_near_pi(r, trace), detail::angle_near_pi(w), false};
  }
  return {w.normalized(), angle, false};
}

inline bool is_rotation(const Mat3& r, double tol = 1e-9) {
  const Mat3 defect = r * r.transpose() - Mat3::Identity();
  return defect.cwiseAbs().maxCoeff() < tol &&
         std::abs(r.determinant() - 1.0) < tol;
}

}  // namespace stereocal
