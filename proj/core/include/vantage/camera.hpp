// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "vantage/geometry.hpp"

namespace vantage {

/// Pinhole camera with a rigid body-to-camera extrinsic.
///
/// Camera frame convention: z along the optical axis, x to the right of the
/// image, y down. T_body_camera is the pose of the camera in the body frame.
struct CameraModel {
  double fx = 300.0;
  double fy = 300.0;
  double cx = 320.0;
  double cy = 240.0;
  int width = 640;
  int height = 480;
  Pose T_body_camera;

  void validate() const {
    if (fx <= 0 || fy <= 0) throw std::invalid_argument("CameraModel: fx, fy must be > 0");
    if (cx <= 0 || cx >= width || cy <= 0 || cy >= height) {
      throw std::invalid_argument("CameraModel: principal point outside image");
    }
  }

  /// Projects a camera-frame point; nullopt when behind the camera or
  /// outside the image bounds.
  std::optional<Vector2d> project(const Vector3d& p_camera) const;

  /// Unit ray through a pixel, camera frame.
  Vector3d backproject_ray(const Vector2d& pixel) const;

  bool in_image(const Vector2d& pixel) const {
    return pixel.x() >= 0.0 && pixel.x() < width && pixel.y() >= 0.0 && pixel.y() < height;
  }
};

/// Projects a world point through the body pose and the camera extrinsic.
std::optional<Vector2d> project_landmark(const CameraModel& cam, const Pose& body_pose,
                                         const Vector3d& point_world);

/// The standard four-camera rig used by the simulator: front, left, rear,
/// right, mounted 1.5 m up and pitched down so the nearby ground is visible.
std::vector<CameraModel> default_camera_rig(double pitch_down_rad = 0.45);

}  // namespace vantage
