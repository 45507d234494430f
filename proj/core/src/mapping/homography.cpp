// SPDX-License-Identifier: Apache-2.0

#include "vantage/mapping/homography.hpp"

#include <cmath>

namespace vantage::mapping {

std::optional<Vector3d> GroundHomography::apply(const Vector2d& pixel) const {
  const Vector3d h = pixel_to_ground_ * Vector3d(pixel.x(), pixel.y(), 1.0);
  // The homogeneous scale equals 1/depth, so its sign encodes cheirality;
  // pixels on or above the vanishing line map to w <= 0.
  if (h.z() <= 1e-12) return std::nullopt;
  const Vector3d ground(h.x() / h.z(), h.y() / h.z(), 0.0);
  if ((ground - camera_origin_body_).norm() > max_range_m_) return std::nullopt;
  return ground;
}

GroundHomography compute_ground_homography(const CameraModel& cam, double max_range_m) {
  cam.validate();
  const Matrix3d r_e = cam.T_body_camera.rotation().matrix();
  const Vector3d& t_e = cam.T_body_camera.translation();

  const Vector3d optical_axis_body = r_e.col(2);
  if (std::abs(optical_axis_body.z()) < 1e-6) {
    throw DegenerateViewError("compute_ground_homography: optical axis parallel to the plane");
  }
  if (std::abs(t_e.z()) < 1e-9) {
    throw DegenerateViewError("compute_ground_homography: camera center on the plane");
  }

  Matrix3d k;
  k << cam.fx, 0, cam.cx, 0, cam.fy, cam.cy, 0, 0, 1;

  // p_camera = x * (R^T e1) + y * (R^T e2) - R^T t for ground point (x, y, 0).
  Matrix3d ground_basis;
  ground_basis.col(0) = r_e.transpose() * Vector3d::UnitX();
  ground_basis.col(1) = r_e.transpose() * Vector3d::UnitY();
  ground_basis.col(2) = -r_e.transpose() * t_e;

  const Matrix3d ground_to_pixel = k * ground_basis;
  if (std::abs(ground_to_pixel.determinant()) < 1e-12) {
    throw DegenerateViewError("compute_ground_homography: homography not invertible");
  }
  return GroundHomography(ground_to_pixel, t_e, max_range_m);
}

BackprojectionResult backproject_mask(std::span<const Vector2d> pixels,
                                      const GroundHomography& homography, const Pose& body_pose) {
  BackprojectionResult result;
  result.points_world.reserve(pixels.size());
  for (const Vector2d& pixel : pixels) {
    const auto ground = homography.apply(pixel);
    if (!ground) {
      ++result.skipped;
      continue;
    }
    result.points_world.push_back(body_pose * *ground);
  }
  return result;
}

}  // namespace vantage::mapping
