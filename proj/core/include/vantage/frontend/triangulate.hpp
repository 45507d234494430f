// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vantage/camera.hpp"

namespace vantage::frontend {

struct TriangulationOptions {
  bool robust = false;       // Huber-weighted reprojection refinement
  double huber_k_px = 1.345; // 1.345 * pixel sigma at the 1 px default
  int max_iterations = 20;
  double max_condition = 1e8;
};

/// Multi-view triangulation: linear (DLT) initialization, Gauss-Newton
/// reprojection refinement, optional Huber weighting.
///
/// `observations` pairs each observing camera pose (T_world_camera) with the
/// observed pixel. Returns nullopt when the observation rays are too close
/// to parallel (normal-system condition number above max_condition).
std::optional<Vector3d> triangulate(
    const std::vector<std::pair<Pose, Vector2d>>& observations, const CameraModel& cam,
    const TriangulationOptions& options = {});

}  // namespace vantage::frontend
