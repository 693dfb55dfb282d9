#pragma once

#include <vector>

#include "stereocal/types.hpp"

namespace stereocal {

// Pinhole intrinsics [px]. Correspondences are assumed to be given in
// undistorted pixel coordinates.
struct Intrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  double skew = 0.0;

  Mat3 matrix() const {
    Mat3 k;
    // clang-format off
    k <<  fx, skew, cx,
         0.0,   fy, cy,
         0.0,  0.0, 1.0;
    // clang-format on
    return k;
  }
};

// Ray through pixel p at unit depth (z component exactly 1).
inline Vec3 back_project(const Intrinsics& k, const PixelPoint& p) {
  const double y = (p.y() - k.cy) / k.fy;
  const double x = (p.x() - k.cx - k.skew * y) / k.fx;
  return Vec3(x, y, 1.0);
}

// Forward pinhole projection of a camera-frame point with z > 0.
inline PixelPoint project(const Intrinsics& k, const Vec3& p) {
  const double x = p.x() / p.z();
  const double y = p.y() / p.z();
  return PixelPoint(k.fx * x + k.skew * y + k.cx, k.fy * y + k.cy);
}

struct CorrespondencePair {
  PixelPoint left = PixelPoint::Zero();
  PixelPoint right = PixelPoint::Zero();
};

// Matched pixel pairs plus the intrinsics of both cameras; one stereo
// image pair's worth of observations.
struct CorrespondenceSet {
  std::vector<CorrespondencePair> pairs;
  Intrinsics intrinsics_left;
  Intrinsics intrinsics_right;
};

}  // namespace stereocal
