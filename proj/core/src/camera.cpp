// SPDX-License-Identifier: Apache-2.0

#include "vantage/camera.hpp"

#include <cmath>

namespace vantage {

std::optional<Vector2d> CameraModel::project(const Vector3d& p_camera) const {
  if (p_camera.z() <= 0.0) return std::nullopt;
  const Vector2d pixel(fx * p_camera.x() / p_camera.z() + cx,
                       fy * p_camera.y() / p_camera.z() + cy);
  if (!in_image(pixel)) return std::nullopt;
  return pixel;
}

Vector3d CameraModel::backproject_ray(const Vector2d& pixel) const {
  Vector3d ray((pixel.x() - cx) / fx, (pixel.y() - cy) / fy, 1.0);
  return ray.normalized();
}

std::optional<Vector2d> project_landmark(const CameraModel& cam, const Pose& body_pose,
                                         const Vector3d& point_world) {
  const Pose T_world_camera = body_pose * cam.T_body_camera;
  return cam.project(T_world_camera.inverse() * point_world);
}

namespace {

// Camera rotation in the body frame from a horizontal forward direction and a
// downward pitch. Body frame: x forward, y left, z up.
Rotation camera_rotation(const Vector3d& forward_horizontal, double pitch_down) {
  const Vector3d down(0, 0, -1);
  const Vector3d z_cam =
      (std::cos(pitch_down) * forward_horizontal + std::sin(pitch_down) * down).normalized();
  const Vector3d x_cam = down.cross(forward_horizontal).normalized();
  const Vector3d y_cam = z_cam.cross(x_cam).normalized();
  Matrix3d r;
  r.col(0) = x_cam;
  r.col(1) = y_cam;
  r.col(2) = z_cam;
  return Rotation(r);
}

}  // namespace

std::vector<CameraModel> default_camera_rig(double pitch_down_rad) {
  const double h = 1.5;
  struct Mount {
    Vector3d forward;
    Vector3d offset;
  };
  const Mount mounts[4] = {
      {{1, 0, 0}, {2.0, 0.0, h}},    // front
      {{0, 1, 0}, {0.0, 1.0, h}},    // left
      {{-1, 0, 0}, {-2.0, 0.0, h}},  // rear
      {{0, -1, 0}, {0.0, -1.0, h}},  // right
  };
  std::vector<CameraModel> rig;
  rig.reserve(4);
  for (const Mount& m : mounts) {
    CameraModel cam;
    cam.T_body_camera = Pose(camera_rotation(m.forward, pitch_down_rad), m.offset);
    rig.push_back(cam);
  }
  return rig;
}

}  // namespace vantage
