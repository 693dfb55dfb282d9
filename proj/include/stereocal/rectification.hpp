#pragma once

#include <cmath>
#include <utility>

#include "stereocal/camera.hpp"
#include "stereocal/so3.hpp"

namespace stereocal {

// One rotation per camera frame; applying them places both image planes on
// a common plane parallel to the baseline.
struct RectifyingPair {
  Mat3 R_left = Mat3::Identity();
  Mat3 R_right = Mat3::Identity();
};

// Relative pose of the left camera frame expressed in the right one,
// p_right = rotation * p_left + translation. The baseline length is
// unobservable from pixel correspondences, so translation is unit norm.
struct Extrinsics {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3(-1.0, 0.0, 0.0);
};

using Homography = Mat3;

inline constexpr double kBaselineTol = 1e-9;
inline constexpr double kHorizonTol = 1e-12;

// Right rectifying rotation determined by the baseline direction: rows are
// -t, normalize(i3 x -t), and the cross product of the first two. The
// second row is orthogonal to the optical axis by construction.
inline Mat3 build_Rr_from_t(const Vec3& t) {
  const Vec3 r1 = -t;
  Vec3 r2 = Vec3::UnitZ().cross(r1);
  const double n = r2.norm();
  if (n <= kBaselineTol) {
    throw DegenerateBaseline("baseline is parallel to the optical axis");
  }
  r2 /= n;
  const Vec3 r3 = r1.cross(r2);
  Mat3 r;
  r.row(0) = r1.transpose();
  r.row(1) = r2.transpose();
  r.row(2) = r3.transpose();
  return r;
}

inline Extrinsics extract_extrinsics(const RectifyingPair& rect) {
  Extrinsics ext;
  ext.rotation = rect.R_right.transpose() * rect.R_left;
  ext.translation = -rect.R_right.row(0).transpose();
  return ext;
}

// Inverse of extract_extrinsics: the unique rectifying pair whose right
// rotation has the build_Rr_from_t structure.
inline RectifyingPair init_from_prior(const Extrinsics& ext) {
  const Mat3 rr = build_Rr_from_t(ext.translation);
  return {rr * ext.rotation, rr};
}

// H_left = K_new R_left K_left^-1 and the right-camera analogue; warping
// with these maps corresponding pixels onto a common image row.
inline std::pair<Homography, Homography> rectifying_homographies(
    const RectifyingPair& rect, const Intrinsics& k_left,
    const Intrinsics& k_right, const Intrinsics& k_new) {
  const Mat3 kn = k_new.matrix();
  return {Homography(kn * rect.R_left * k_left.matrix().inverse()),
          Homography(kn * rect.R_right * k_right.matrix().inverse())};
}

inline PixelPoint apply_homography(const Homography& h, const PixelPoint& p) {
  const Vec3 q = h * Vec3(p.x(), p.y(), 1.0);
  return PixelPoint(q.x() / q.z(), q.y() / q.z());
}

// Row coordinate (second row over third row) of a ray rotated by r.
// Invariant to positive rescaling of the ray, which is what makes
// unit-depth rays a valid stand-in for unknown-depth camera points.
inline double row_ratio(const Mat3& r, const Vec3& ray) {
  const Vec3 a = r * ray;
  if (std::abs(a.z()) < kHorizonTol) {
    throw PointAtHorizon("ray lies on the rotated principal plane");
  }
  return a.y() / a.z();
}

// Vertical disparity of one correspondence under a candidate rectification;
// zero iff the pair is row-aligned after rectifying both views.
inline double vertical_residual(const RectifyingPair& rect,
                                const CorrespondencePair& pair,
                                const Intrinsics& k_left,
                                const Intrinsics& k_right) {
  return row_ratio(rect.R_left, back_project(k_left, pair.left)) -
         row_ratio(rect.R_right, back_project(k_right, pair.right));
}

}  // namespace stereocal
