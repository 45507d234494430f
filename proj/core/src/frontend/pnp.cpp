// SPDX-License-Identifier: Apache-2.0

#include "vantage/frontend/pnp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "vantage/sim/rng.hpp"

namespace vantage::frontend {

namespace {

using Correspondences = std::vector<std::pair<Vector2d, Vector3d>>;

struct WorldToCamera {
  Matrix3d rotation;
  Vector3d translation;
};

Vector3d normalized_coords(const CameraModel& cam, const Vector2d& pixel) {
  return {(pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0};
}

double reprojection_error_px(const CameraModel& cam, const WorldToCamera& pose,
                             const Vector2d& pixel, const Vector3d& point) {
  const Vector3d p = pose.rotation * point + pose.translation;
  if (p.z() <= 1e-9) return std::numeric_limits<double>::infinity();
  const Vector2d projected(cam.fx * p.x() / p.z() + cam.cx, cam.fy * p.y() / p.z() + cam.cy);
  return (projected - pixel).norm();
}

// DLT for the 3x4 projection [R | t] on normalized coordinates.
std::optional<WorldToCamera> solve_dlt(const Correspondences& corr, const CameraModel& cam,
                                       const std::vector<int>& idx) {
  Eigen::MatrixXd a(2 * idx.size(), 12);
  for (size_t r = 0; r < idx.size(); ++r) {
    const Vector3d x = normalized_coords(cam, corr[idx[r]].first);
    const Vector3d& p = corr[idx[r]].second;
    const Eigen::Vector4d ph(p.x(), p.y(), p.z(), 1.0);
    a.row(2 * r).setZero();
    a.row(2 * r + 1).setZero();
    a.block<1, 4>(2 * r, 0) = ph.transpose();
    a.block<1, 4>(2 * r, 8) = -x.x() * ph.transpose();
    a.block<1, 4>(2 * r + 1, 4) = ph.transpose();
    a.block<1, 4>(2 * r + 1, 8) = -x.y() * ph.transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 12, 1> v = svd.matrixV().col(11);
  Eigen::Matrix<double, 3, 4> proj;
  proj.row(0) = v.segment<4>(0).transpose();
  proj.row(1) = v.segment<4>(4).transpose();
  proj.row(2) = v.segment<4>(8).transpose();

  Matrix3d m = proj.block<3, 3>(0, 0);
  Eigen::JacobiSVD<Matrix3d> msvd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double scale = msvd.singularValues().mean();
  if (scale < 1e-12) return std::nullopt;
  Matrix3d rotation = msvd.matrixU() * msvd.matrixV().transpose();
  double sign = rotation.determinant() < 0 ? -1.0 : 1.0;
  rotation *= sign;
  Vector3d translation = sign * proj.col(3) / scale;

  // Cheirality: flip the global sign so sampled points sit in front.
  int positive = 0;
  for (int i : idx) {
    if ((rotation * corr[i].second + translation).z() > 0) ++positive;
  }
  if (positive * 2 < static_cast<int>(idx.size())) {
    rotation *= -1.0;
    translation *= -1.0;
    // Re-orthonormalize: -R has determinant -1 in 3D, so recompose.
    Eigen::JacobiSVD<Matrix3d> rsvd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Vector3d s(1, 1, (rsvd.matrixU() * rsvd.matrixV().transpose()).determinant());
    rotation = rsvd.matrixU() * s.asDiagonal() * rsvd.matrixV().transpose();
  }
  return WorldToCamera{rotation, translation};
}

// Gauss-Newton reprojection refinement of a world-to-camera pose.
WorldToCamera refine(const Correspondences& corr, const CameraModel& cam,
                     const std::vector<int>& idx, WorldToCamera pose) {
  for (int it = 0; it < 15; ++it) {
    Matrix6d h = Matrix6d::Zero();
    Vector6d g = Vector6d::Zero();
    for (int i : idx) {
      const Vector3d p = pose.rotation * corr[i].second + pose.translation;
      if (p.z() <= 1e-9) continue;
      const double iz = 1.0 / p.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << cam.fx * iz, 0, -cam.fx * p.x() * iz * iz, 0, cam.fy * iz, -cam.fy * p.y() * iz * iz;
      const Vector2d residual(cam.fx * p.x() * iz + cam.cx - corr[i].first.x(),
                              cam.fy * p.y() * iz + cam.cy - corr[i].first.y());
      Eigen::Matrix<double, 2, 6> jac;
      jac.block<2, 3>(0, 0) = dpi * (-pose.rotation * skew(corr[i].second));
      jac.block<2, 3>(0, 3) = dpi;
      h += jac.transpose() * jac;
      g += jac.transpose() * residual;
    }
    const Vector6d delta = (h + 1e-9 * Matrix6d::Identity()).ldlt().solve(-g);
    pose.rotation = pose.rotation * so3_exp(delta.head<3>());
    pose.translation += delta.tail<3>();
    if (delta.norm() < 1e-12) break;
  }
  return pose;
}

}  // namespace

std::optional<PnpResult> solve_pnp_ransac(const Correspondences& correspondences,
                                          const CameraModel& cam, const RansacParams& params) {
  if (correspondences.size() < 6) {
    throw std::invalid_argument("solve_pnp_ransac: need >= 6 correspondences");
  }
  const int n = static_cast<int>(correspondences.size());
  sim::Rng rng(params.seed);

  std::vector<int> best_inliers;
  for (int it = 0; it < params.max_iterations; ++it) {
    std::vector<int> sample;
    while (sample.size() < 6) {
      const int c = rng.uniform_int(0, n - 1);
      if (std::find(sample.begin(), sample.end(), c) == sample.end()) sample.push_back(c);
    }
    const auto pose = solve_dlt(correspondences, cam, sample);
    if (!pose) continue;
    std::vector<int> inliers;
    for (int i = 0; i < n; ++i) {
      if (reprojection_error_px(cam, *pose, correspondences[i].first, correspondences[i].second) <
          params.threshold_px) {
        inliers.push_back(i);
      }
    }
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
    if (static_cast<int>(best_inliers.size()) == n) break;
  }

  if (static_cast<int>(best_inliers.size()) < params.min_inliers) return std::nullopt;

  auto pose = solve_dlt(correspondences, cam, best_inliers);
  if (!pose) return std::nullopt;
  WorldToCamera refined = refine(correspondences, cam, best_inliers, *pose);

  std::vector<int> inliers;
  for (int i = 0; i < n; ++i) {
    if (reprojection_error_px(cam, refined, correspondences[i].first, correspondences[i].second) <
        params.threshold_px) {
      inliers.push_back(i);
    }
  }
  if (static_cast<int>(inliers.size()) < params.min_inliers) return std::nullopt;
  refined = refine(correspondences, cam, inliers, refined);

  PnpResult result;
  result.inlier_indices = std::move(inliers);
  result.T_world_camera =
      Pose(Rotation(Matrix3d(refined.rotation)), refined.translation).inverse();
  return result;
}

}  // namespace vantage::frontend
