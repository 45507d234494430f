// SPDX-License-Identifier: Apache-2.0

#include "vantage/frontend/triangulate.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vantage::frontend {

namespace {

struct CameraRow {
  Matrix3d rotation;     // world to camera
  Vector3d translation;  // world to camera
  Vector3d x;            // normalized observation
};

}  // namespace

std::optional<Vector3d> triangulate(const std::vector<std::pair<Pose, Vector2d>>& observations,
                                    const CameraModel& cam, const TriangulationOptions& options) {
  if (observations.size() < 2) {
    throw std::invalid_argument("triangulate: need >= 2 observations");
  }

  std::vector<CameraRow> rows;
  rows.reserve(observations.size());
  for (const auto& [pose, pixel] : observations) {
    const Pose inv = pose.inverse();
    rows.push_back({inv.rotation().matrix(), inv.translation(),
                    {(pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0}});
  }

  // DLT initialization on x cross (P X) = 0.
  Eigen::MatrixXd a(2 * rows.size(), 4);
  for (size_t i = 0; i < rows.size(); ++i) {
    Eigen::Matrix<double, 3, 4> p;
    p.block<3, 3>(0, 0) = rows[i].rotation;
    p.col(3) = rows[i].translation;
    a.row(2 * i) = rows[i].x.x() * p.row(2) - p.row(0);
    a.row(2 * i + 1) = rows[i].x.y() * p.row(2) - p.row(1);
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d xh = svd.matrixV().col(3);
  if (std::abs(xh(3)) < 1e-10 * xh.head<3>().norm()) return std::nullopt;
  Vector3d point = xh.head<3>() / xh(3);

  // Gauss-Newton refinement in pixels.
  for (int it = 0; it < options.max_iterations; ++it) {
    Matrix3d h = Matrix3d::Zero();
    Vector3d g = Vector3d::Zero();
    for (const CameraRow& row : rows) {
      const Vector3d pc = row.rotation * point + row.translation;
      if (pc.z() <= 1e-9) continue;
      const double iz = 1.0 / pc.z();
      Eigen::Matrix<double, 2, 3> dpi;
      dpi << cam.fx * iz, 0, -cam.fx * pc.x() * iz * iz, 0, cam.fy * iz,
          -cam.fy * pc.y() * iz * iz;
      const Vector2d residual(
          cam.fx * pc.x() * iz + cam.cx - (row.x.x() * cam.fx + cam.cx),
          cam.fy * pc.y() * iz + cam.cy - (row.x.y() * cam.fy + cam.cy));
      const Eigen::Matrix<double, 2, 3> jac = dpi * row.rotation;
      double weight = 1.0;
      if (options.robust) {
        const double e = residual.norm();
        if (e > options.huber_k_px) weight = options.huber_k_px / e;
      }
      h += weight * jac.transpose() * jac;
      g += weight * jac.transpose() * residual;
    }

    const Eigen::SelfAdjointEigenSolver<Matrix3d> eig(h);
    const double lo = eig.eigenvalues()(0);
    const double hi = eig.eigenvalues()(2);
    if (lo <= 0 || hi / lo > options.max_condition) return std::nullopt;

    const Vector3d delta = h.ldlt().solve(-g);
    point += delta;
    if (delta.norm() < 1e-12) break;
  }
  return point;
}

}  // namespace vantage::frontend
