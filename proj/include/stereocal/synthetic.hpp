#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "stereocal/rectification.hpp"

namespace stereocal {

// The four off-center mounts rotate the rig by a fixed angle: top/bottom
// pitch about the camera x-axis (+/-), left/right yaw about the y-axis.
enum class Viewpoint { middle, top, bottom, left, right };

inline Vec3 viewpoint_axis(Viewpoint v) {
  switch (v) {
    case Viewpoint::top: return Vec3::UnitX();
    case Viewpoint::bottom: return -Vec3::UnitX();
    case Viewpoint::left: return Vec3::UnitY();
    case Viewpoint::right: return -Vec3::UnitY();
    default: return Vec3::Zero();
  }
}

// Composes the viewpoint rotation onto the base extrinsics; the translation
// direction is rotated along and re-normalized.
inline Extrinsics perturb_viewpoint(const Extrinsics& base, Viewpoint v,
                                    double angle) {
  if (v == Viewpoint::middle) return base;
  const Mat3 q = exp_so3(angle * viewpoint_axis(v));
  Extrinsics out;
  out.rotation = q * base.rotation;
  out.translation = (q * base.translation).normalized();
  return out;
}

// A rectified rig: identity rotation, unit baseline along -x.
inline Extrinsics identity_rig() { return Extrinsics{}; }

struct SceneConfig {
  int n_points = 50;
  double depth_min = 2.0;   // baseline units
  double depth_max = 20.0;
  double image_width = 1920.0;   // px
  double image_height = 1200.0;  // px
  Intrinsics intrinsics_left{1200.0, 1200.0, 960.0, 600.0, 0.0};
  Intrinsics intrinsics_right{1200.0, 1200.0, 960.0, 600.0, 0.0};
  double pixel_noise_sigma = 0.0;  // px, isotropic, both views
  double outlier_fraction = 0.0;   // in [0, 1)
  std::uint64_t seed = 0;
};

struct GroundTruth {
  Extrinsics extrinsics;
  RectifyingPair rectifying;
  std::vector<Vec3> points;  // left-camera frame, baseline units
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t x = seed + salt * 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace detail

// Samples points uniformly in the left frustum within the depth range,
// keeps only those visible in both views, projects them, then applies
// Gaussian pixel noise and replaces an outlier fraction of right-view
// pixels with uniform in-image positions. Point sampling, noise, and
// outliers draw from independent streams derived from the seed, so e.g.
// two seeds differing only in sigma share the same geometry.
inline std::pair<GroundTruth, CorrespondenceSet> generate(
    const SceneConfig& config, const Extrinsics& truth) {
  GroundTruth gt{truth, init_from_prior(truth), {}};
  gt.points.reserve(static_cast<std::size_t>(config.n_points));

  CorrespondenceSet obs;
  obs.intrinsics_left = config.intrinsics_left;
  obs.intrinsics_right = config.intrinsics_right;
  obs.pairs.reserve(static_cast<std::size_t>(config.n_points));

  std::mt19937_64 point_rng(detail::mix_seed(config.seed, 1));
  std::mt19937_64 noise_rng(detail::mix_seed(config.seed, 2));
  std::mt19937_64 outlier_rng(detail::mix_seed(config.seed, 3));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const long max_attempts = 100L * config.n_points;
  long attempts = 0;
  while (static_cast<int>(gt.points.size()) < config.n_points) {
    if (++attempts > max_attempts) {
      throw InsufficientVisibility(
          "could not sample enough co-visible points for this rig");
    }
    const PixelPoint pl(unit(point_rng) * config.image_width,
                        unit(point_rng) * config.image_height);
    const double z =
        config.depth_min + unit(point_rng) * (config.depth_max - config.depth_min);
    const Vec3 p = z * back_project(config.intrinsics_left, pl);
    const Vec3 pr = truth.rotation * p + truth.translation;
    if (pr.z() <= 0.0) continue;
    const PixelPoint pr_px = project(config.intrinsics_right, pr);
    if (pr_px.x() < 0.0 || pr_px.x() > config.image_width || pr_px.y() < 0.0 ||
        pr_px.y() > config.image_height) {
      continue;
    }
    gt.points.push_back(p);
    obs.pairs.push_back({pl, pr_px});
  }

  if (config.pixel_noise_sigma > 0.0) {
    std::normal_distribution<double> gauss(0.0, config.pixel_noise_sigma);
    for (CorrespondencePair& pair : obs.pairs) {
      pair.left.x() += gauss(noise_rng);
      pair.left.y() += gauss(noise_rng);
      pair.right.x() += gauss(noise_rng);
      pair.right.y() += gauss(noise_rng);
    }
  }

  const int n_outliers =
      static_cast<int>(std::llround(config.outlier_fraction * config.n_points));
  if (n_outliers > 0) {
    std::vector<int> indices(obs.pairs.size());
    for (std::size_t i = 0; i < indices.size(); ++i) indices[i] = static_cast<int>(i);
    std::vector<int> chosen;
    std::sample(indices.begin(), indices.end(), std::back_inserter(chosen),
                n_outliers, outlier_rng);
    for (int i : chosen) {
      obs.pairs[static_cast<std::size_t>(i)].right =
          PixelPoint(unit(outlier_rng) * config.image_width,
                     unit(outlier_rng) * config.image_height);
    }
  }

  return {std::move(gt), std::move(obs)};
}

// M scenes with independent point sets and noise under one shared ground
// truth (scene k draws from seed + k). The returned GroundTruth carries the
// shared extrinsics; per-scene points are not retained.
inline std::pair<std::vector<CorrespondenceSet>, GroundTruth> run_protocol(
    const SceneConfig& config, const Extrinsics& base, int M) {
  std::vector<CorrespondenceSet> sets;
  sets.reserve(static_cast<std::size_t>(M));
  for (int k = 0; k < M; ++k) {
    SceneConfig scene = config;
    scene.seed = config.seed + static_cast<std::uint64_t>(k);
    sets.push_back(generate(scene, base).second);
  }
  return {std::move(sets), GroundTruth{base, init_from_prior(base), {}}};
}

}  // namespace stereocal
