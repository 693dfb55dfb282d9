#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "stereocal/aggregate.hpp"

namespace stereocal {

// Offline-calibrated (or synthetic ground-truth) extrinsics the estimates
// are judged against.
struct ReferenceExtrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3(-1.0, 0.0, 0.0);
  RotationVector theta = RotationVector::Zero();
};

inline ReferenceExtrinsics make_reference(const Extrinsics& ext) {
  return {ext.rotation, ext.translation, log_so3(ext.rotation)};
}

// e_t / e_theta score the aggregated estimate; sigma_t / sigma_theta score
// the spread of the M single-pair estimates around the reference.
struct MetricsReport {
  double e_t = 0.0;
  double e_theta = 0.0;
  double sigma_t = 0.0;
  double sigma_theta = 0.0;
  int M = 0;
};

namespace detail {

// acos of the clamped dot product, evaluated through the chord length when
// the vectors are nearly (anti)parallel: acos itself bottoms out near
// 1.5e-8 one ulp below 1, far above the accuracy the inputs support.
inline double angle_between_unit(const Vec3& a, const Vec3& b) {
  const double d = std::clamp(a.dot(b), -1.0, 1.0);
  if (d > 0.999) {
    return 2.0 * std::asin(std::min(0.5 * (a - b).norm(), 1.0));
  }
  if (d < -0.999) {
    return kPi - 2.0 * std::asin(std::min(0.5 * (a + b).norm(), 1.0));
  }
  return std::acos(d);
}

}  // namespace detail

// Angular error between the reference and aggregated baseline directions.
inline double angular_error_t(const ReferenceExtrinsics& ref,
                              const GlobalEstimate& global) {
  return detail::angle_between_unit(ref.translation, global.translation);
}

// Euclidean distance between the reference and aggregated rotation vectors.
inline double rotation_error_theta(const ReferenceExtrinsics& ref,
                                   const GlobalEstimate& global) {
  return (global.theta - ref.theta).norm();
}

// RMS angular error of the per-pair baseline directions. Expects the
// estimate signs already canonicalized against the reference.
inline double sigma_t(const ReferenceExtrinsics& ref,
                      const std::vector<PairEstimate>& estimates) {
  if (estimates.empty()) return 0.0;
  double acc = 0.0;
  for (const PairEstimate& e : estimates) {
    const double a = detail::angle_between_unit(ref.translation, e.translation);
    acc += a * a;
  }
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

// RMS distance of the per-pair rotation vectors from the reference.
inline double sigma_theta(const ReferenceExtrinsics& ref,
                          const std::vector<PairEstimate>& estimates) {
  if (estimates.empty()) return 0.0;
  double acc = 0.0;
  for (const PairEstimate& e : estimates) {
    acc += (e.theta - ref.theta).squaredNorm();
  }
  return std::sqrt(acc / static_cast<double>(estimates.size()));
}

// Flips per-pair translations (and degenerate-prone axes) into the
// reference hemisphere before computing spread metrics.
inline std::vector<PairEstimate> canonicalize_against(
    std::vector<PairEstimate> estimates, const ReferenceExtrinsics& ref) {
  const AxisAngle ref_aa = axis_angle(ref.rotation);
  for (PairEstimate& e : estimates) {
    if (e.translation.dot(ref.translation) < 0.0) e.translation = -e.translation;
    if (!e.axis_degenerate && !ref_aa.degenerate &&
        e.axis.dot(ref_aa.axis) < 0.0) {
      detail::flip_axis(e);
    }
  }
  return estimates;
}

inline MetricsReport evaluate_metrics(const ReferenceExtrinsics& ref,
                                      const GlobalEstimate& global,
                                      const std::vector<PairEstimate>& estimates) {
  MetricsReport report;
  report.e_t = angular_error_t(ref, global);
  report.e_theta = rotation_error_theta(ref, global);
  report.sigma_t = sigma_t(ref, estimates);
  report.sigma_theta = sigma_theta(ref, estimates);
  report.M = static_cast<int>(estimates.size());
  return report;
}

}  // namespace stereocal
