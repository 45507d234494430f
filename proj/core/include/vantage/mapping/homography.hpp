// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "vantage/camera.hpp"

namespace vantage::mapping {

class DegenerateViewError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Plane-induced homography between image pixels and the body-frame ground
/// plane z = 0, fixed at calibration time. Valid for pixels strictly below
/// the plane's vanishing line and within max_range of the camera.
class GroundHomography {
 public:
  GroundHomography(const Eigen::Matrix3d& ground_to_pixel, const Vector3d& camera_origin_body,
                   double max_range_m)
      : ground_to_pixel_(ground_to_pixel),
        pixel_to_ground_(ground_to_pixel.inverse()),
        camera_origin_body_(camera_origin_body),
        max_range_m_(max_range_m) {}

  /// Body-frame ground point (x, y, 0) under a pixel; nullopt outside the
  /// validity region.
  std::optional<Vector3d> apply(const Vector2d& pixel) const;

  bool in_validity_region(const Vector2d& pixel) const { return apply(pixel).has_value(); }

  const Eigen::Matrix3d& pixel_to_ground() const { return pixel_to_ground_; }
  const Eigen::Matrix3d& ground_to_pixel() const { return ground_to_pixel_; }

 private:
  Eigen::Matrix3d ground_to_pixel_;
  Eigen::Matrix3d pixel_to_ground_;
  Vector3d camera_origin_body_;
  double max_range_m_;
};

/// Derives the homography for a camera observing the body-frame plane z = 0.
/// Throws DegenerateViewError when the optical axis is parallel to the plane
/// (within 1e-6 rad) or the camera center lies on it.
GroundHomography compute_ground_homography(const CameraModel& cam, double max_range_m = 100.0);

struct BackprojectionResult {
  std::vector<Vector3d> points_world;
  int skipped = 0;  // pixels outside the validity region
};

/// Maps ground-masked pixels through the homography and the body pose into
/// world-frame points.
BackprojectionResult backproject_mask(std::span<const Vector2d> pixels,
                                      const GroundHomography& homography, const Pose& body_pose);

}  // namespace vantage::mapping
