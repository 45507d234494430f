// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vantage/camera.hpp"
#include "vantage/frontend/two_view.hpp"

namespace vantage::frontend {

struct PnpResult {
  Pose T_world_camera;
  std::vector<int> inlier_indices;
};

/// Camera localization from 2D-3D correspondences: DLT on sampled minimal
/// sets inside RANSAC, Gauss-Newton reprojection refinement on the consensus.
///
/// Throws std::invalid_argument with fewer than 6 correspondences; returns
/// nullopt when no consensus of params.min_inliers is found.
std::optional<PnpResult> solve_pnp_ransac(
    const std::vector<std::pair<Vector2d, Vector3d>>& correspondences, const CameraModel& cam,
    const RansacParams& params = {});

}  // namespace vantage::frontend
