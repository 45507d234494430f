// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vantage/camera.hpp"

namespace vantage::frontend {

struct RansacParams {
  int max_iterations = 500;
  double threshold_px = 1.0;
  int min_inliers = 8;
  std::uint64_t seed = 42;
};

/// Two-view relative pose with unknown translation magnitude.
///
/// Convention: for a correspondence (pixel_a, pixel_b) the estimate maps
/// points from camera b's frame to camera a's: p_a = R p_b + s * direction,
/// with s >= 0 unknown and `direction` unit-norm.
struct RelativePoseUpToScale {
  Rotation rotation;
  Vector3d direction = Vector3d::UnitX();
  std::vector<int> inlier_indices;
  bool degenerate_translation = false;  // median parallax below 0.5 deg
};

/// Essential-matrix RANSAC (normalized 8-point with rank-2 enforcement)
/// followed by cheirality-disambiguated decomposition.
///
/// Throws std::invalid_argument with fewer than 8 correspondences; returns
/// nullopt when no model reaches params.min_inliers.
std::optional<RelativePoseUpToScale> estimate_relative_pose_up_to_scale(
    const std::vector<std::pair<Vector2d, Vector2d>>& correspondences, const CameraModel& cam,
    const RansacParams& params = {});

}  // namespace vantage::frontend
