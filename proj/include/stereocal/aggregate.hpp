#pragma once

#include <algorithm>
#include <vector>

#include "stereocal/solver.hpp"

namespace stereocal {

// Globally aggregated extrinsics over M per-pair estimates.
struct GlobalEstimate {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3(-1.0, 0.0, 0.0);
  RotationVector theta = RotationVector::Zero();
  Vec3 axis = Vec3::UnitZ();
  double angle = 0.0;
  int contributing_pairs = 0;
  // Every input axis was degenerate; the rotation is identity-like and the
  // axis is the fallback direction.
  bool axes_degenerate = false;
};

// Normalized sum: the unit vector maximizing the summed cosine similarity
// to the inputs.
inline Vec3 spherical_mean(const std::vector<Vec3>& vectors) {
  if (vectors.empty()) {
    throw DegenerateSum("spherical mean of an empty set");
  }
  Vec3 sum = Vec3::Zero();
  for (const Vec3& v : vectors) sum += v;
  const double n = sum.norm();
  if (n <= 1e-9) {
    throw DegenerateSum("direction sum is (near-)zero");
  }
  return sum / n;
}

namespace detail {

inline Vec3 hemisphere_canonical(const Vec3& v) {
  int k = 0;
  v.cwiseAbs().maxCoeff(&k);
  return v[k] < 0.0 ? Vec3(-v) : v;
}

// Flipping the axis keeps the angle and rebuilds theta and the rotation so
// the estimate stays internally consistent (the rotation becomes its
// inverse, which only happens for noise-dominated near-degenerate axes).
inline void flip_axis(PairEstimate& e) {
  e.axis = -e.axis;
  e.theta = e.angle * e.axis;
  e.rotation = exp_so3(e.theta);
}

}  // namespace detail

// Flips translations and rotation axes onto a shared hemisphere so the
// direction sums in aggregate() cannot cancel. The first estimate (first
// non-degenerate one for axes) is the sign reference and is left unflipped;
// with canonical_reference the reference itself is first flipped so its
// largest-magnitude component is positive, which makes the result
// independent of input order. Degenerate-axis estimates keep their
// translation but never serve as the axis reference.
inline std::vector<PairEstimate> canonicalize_signs(
    std::vector<PairEstimate> estimates, bool canonical_reference = false) {
  if (estimates.empty()) return estimates;

  Vec3 t_ref = estimates.front().translation;
  if (canonical_reference) t_ref = detail::hemisphere_canonical(t_ref);
  for (PairEstimate& e : estimates) {
    if (e.translation.dot(t_ref) < 0.0) e.translation = -e.translation;
  }

  const auto first_axis =
      std::find_if(estimates.begin(), estimates.end(),
                   [](const PairEstimate& e) { return !e.axis_degenerate; });
  if (first_axis == estimates.end()) return estimates;
  Vec3 v_ref = first_axis->axis;
  if (canonical_reference) v_ref = detail::hemisphere_canonical(v_ref);
  for (PairEstimate& e : estimates) {
    if (!e.axis_degenerate && e.axis.dot(v_ref) < 0.0) detail::flip_axis(e);
  }
  return estimates;
}

namespace detail {

inline double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace detail

// Closed-form global optimum: spherical means of the canonicalized
// translations and rotation axes, with the median rotation angle.
// Degenerate (near-zero-angle) estimates still contribute their angle.
inline GlobalEstimate aggregate(const std::vector<PairEstimate>& estimates,
                                bool canonical_reference = false) {
  if (estimates.empty()) {
    throw DegenerateSum("aggregate of an empty estimate list");
  }
  const std::vector<PairEstimate> canon =
      canonicalize_signs(estimates, canonical_reference);

  std::vector<Vec3> translations;
  std::vector<Vec3> axes;
  std::vector<double> angles;
  translations.reserve(canon.size());
  angles.reserve(canon.size());
  for (const PairEstimate& e : canon) {
    translations.push_back(e.translation);
    angles.push_back(e.angle);
    if (!e.axis_degenerate) axes.push_back(e.axis);
  }

  GlobalEstimate g;
  g.translation = spherical_mean(translations);
  g.angle = detail::median(std::move(angles));
  g.contributing_pairs = static_cast<int>(canon.size());
  if (axes.empty()) {
    g.axes_degenerate = true;
    g.axis = Vec3::UnitZ();
  } else {
    g.axis = spherical_mean(axes);
  }
  g.theta = g.angle * g.axis;
  g.rotation = exp_so3(g.theta);
  return g;
}

}  // namespace stereocal
