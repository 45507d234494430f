// SPDX-License-Identifier: Apache-2.0

#include "vantage/frontend/two_view.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "vantage/sim/rng.hpp"

namespace vantage::frontend {

namespace {

using Correspondences = std::vector<std::pair<Vector2d, Vector2d>>;

Vector3d normalized_coords(const CameraModel& cam, const Vector2d& pixel) {
  return {(pixel.x() - cam.cx) / cam.fx, (pixel.y() - cam.cy) / cam.fy, 1.0};
}

// Least-squares essential matrix from >= 8 correspondences (normalized
// coordinates), projected onto the essential manifold.
Matrix3d fit_essential(const Correspondences& corr, const CameraModel& cam,
                       const std::vector<int>& idx) {
  Eigen::MatrixXd a(idx.size(), 9);
  for (size_t r = 0; r < idx.size(); ++r) {
    const Vector3d xa = normalized_coords(cam, corr[idx[r]].first);
    const Vector3d xb = normalized_coords(cam, corr[idx[r]].second);
    a.row(r) << xa.x() * xb.x(), xa.x() * xb.y(), xa.x(), xa.y() * xb.x(), xa.y() * xb.y(),
        xa.y(), xb.x(), xb.y(), 1.0;
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Matrix<double, 9, 1> e = svd.matrixV().col(8);
  Matrix3d essential;
  essential << e(0), e(1), e(2), e(3), e(4), e(5), e(6), e(7), e(8);
  // Rank-2 enforcement with equal leading singular values.
  const Eigen::JacobiSVD<Matrix3d> esvd(essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return esvd.matrixU() * Eigen::Vector3d(1, 1, 0).asDiagonal() * esvd.matrixV().transpose();
}

// Max of the two point-to-epipolar-line distances, pixels.
double epipolar_distance_px(const Matrix3d& fundamental, const Vector2d& pa, const Vector2d& pb) {
  const Vector3d ua(pa.x(), pa.y(), 1.0);
  const Vector3d ub(pb.x(), pb.y(), 1.0);
  const Vector3d la = fundamental * ub;            // line in image a
  const Vector3d lb = fundamental.transpose() * ua;  // line in image b
  const double val = ua.dot(la);
  const double da = std::abs(val) / std::max(1e-12, la.head<2>().norm());
  const double db = std::abs(val) / std::max(1e-12, lb.head<2>().norm());
  return std::max(da, db);
}

// Two-view midpoint-free DLT triangulation in camera-a coordinates for a
// candidate (R, t) with p_a = R p_b + t.
std::optional<Vector3d> triangulate_two_view(const Vector3d& xa, const Vector3d& xb,
                                             const Matrix3d& rotation, const Vector3d& t) {
  // Projection of X (frame a): camera a = [I | 0]; camera b = [R^T | -R^T t].
  Eigen::Matrix<double, 4, 4> a;
  Eigen::Matrix<double, 3, 4> pa, pb;
  pa.setZero();
  pa.block<3, 3>(0, 0).setIdentity();
  pb.block<3, 3>(0, 0) = rotation.transpose();
  pb.col(3) = -rotation.transpose() * t;
  a.row(0) = xa.x() * pa.row(2) - pa.row(0);
  a.row(1) = xa.y() * pa.row(2) - pa.row(1);
  a.row(2) = xb.x() * pb.row(2) - pb.row(0);
  a.row(3) = xb.y() * pb.row(2) - pb.row(1);
  const Eigen::JacobiSVD<Eigen::Matrix<double, 4, 4>> svd(a, Eigen::ComputeFullV);
  const Eigen::Vector4d xh = svd.matrixV().col(3);
  if (std::abs(xh(3)) < 1e-12 * xh.head<3>().norm()) return std::nullopt;
  return Vector3d(xh.head<3>() / xh(3));
}

struct Decomposition {
  Rotation rotation;
  Vector3d direction;
  std::vector<double> parallaxes_rad;
};

// Picks the (R, t) candidate with the best cheirality support.
Decomposition decompose_essential(const Matrix3d& essential, const Correspondences& corr,
                                  const CameraModel& cam, const std::vector<int>& inliers) {
  Eigen::JacobiSVD<Matrix3d> svd(essential, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Matrix3d u = svd.matrixU();
  Matrix3d v = svd.matrixV();
  if (u.determinant() < 0) u.col(2) *= -1;
  if (v.determinant() < 0) v.col(2) *= -1;
  Matrix3d w;
  w << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  const Matrix3d r1 = u * w * v.transpose();
  const Matrix3d r2 = u * w.transpose() * v.transpose();
  const Vector3d t = u.col(2);

  const Matrix3d rotations[4] = {r1, r1, r2, r2};
  const Vector3d translations[4] = {t, -t, t, -t};

  int best = 0;
  int best_support = -1;
  std::vector<double> best_parallax;
  for (int k = 0; k < 4; ++k) {
    int support = 0;
    std::vector<double> parallax;
    parallax.reserve(inliers.size());
    for (int idx : inliers) {
      const Vector3d xa = normalized_coords(cam, corr[idx].first);
      const Vector3d xb = normalized_coords(cam, corr[idx].second);
      const auto point = triangulate_two_view(xa, xb, rotations[k], translations[k]);
      if (!point) continue;
      const Vector3d in_b = rotations[k].transpose() * (*point - translations[k]);
      if (point->z() > 0 && in_b.z() > 0) {
        ++support;
        const Vector3d ray_a = point->normalized();
        const Vector3d ray_b = (*point - translations[k]).normalized();
        parallax.push_back(std::acos(std::clamp(ray_a.dot(ray_b), -1.0, 1.0)));
      }
    }
    if (support > best_support) {
      best_support = support;
      best = k;
      best_parallax = std::move(parallax);
    }
  }
  return {Rotation(rotations[best]), translations[best], std::move(best_parallax)};
}

// Best-fit rotation aligning ray bundles, for near-zero-baseline pairs.
Rotation rotation_only_fit(const Correspondences& corr, const CameraModel& cam,
                           const std::vector<int>& inliers) {
  Matrix3d m = Matrix3d::Zero();
  for (int idx : inliers) {
    const Vector3d xa = normalized_coords(cam, corr[idx].first).normalized();
    const Vector3d xb = normalized_coords(cam, corr[idx].second).normalized();
    m += xa * xb.transpose();
  }
  Eigen::JacobiSVD<Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector3d s(1, 1, (svd.matrixU() * svd.matrixV().transpose()).determinant());
  return Rotation(Matrix3d(svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose()));
}

}  // namespace

std::optional<RelativePoseUpToScale> estimate_relative_pose_up_to_scale(
    const Correspondences& correspondences, const CameraModel& cam, const RansacParams& params) {
  if (correspondences.size() < 8) {
    throw std::invalid_argument("estimate_relative_pose_up_to_scale: need >= 8 correspondences");
  }

  Matrix3d k_inv_t;  // K^-T for mapping E to F
  {
    Matrix3d k;
    k << cam.fx, 0, cam.cx, 0, cam.fy, cam.cy, 0, 0, 1;
    k_inv_t = k.inverse().transpose();
  }

  const int n = static_cast<int>(correspondences.size());
  sim::Rng rng(params.seed);
  std::vector<int> best_inliers;

  for (int it = 0; it < params.max_iterations; ++it) {
    std::vector<int> sample;
    while (sample.size() < 8) {
      const int c = rng.uniform_int(0, n - 1);
      if (std::find(sample.begin(), sample.end(), c) == sample.end()) sample.push_back(c);
    }
    const Matrix3d essential = fit_essential(correspondences, cam, sample);
    const Matrix3d fundamental = k_inv_t * essential * k_inv_t.transpose();

    std::vector<int> inliers;
    for (int i = 0; i < n; ++i) {
      if (epipolar_distance_px(fundamental, correspondences[i].first,
                               correspondences[i].second) < params.threshold_px) {
        inliers.push_back(i);
      }
    }
    if (inliers.size() > best_inliers.size()) best_inliers = std::move(inliers);
    if (static_cast<int>(best_inliers.size()) == n) break;
  }

  if (static_cast<int>(best_inliers.size()) < params.min_inliers) return std::nullopt;

  // Refit on the consensus set and refresh the inlier list once.
  Matrix3d essential = fit_essential(correspondences, cam, best_inliers);
  Matrix3d fundamental = k_inv_t * essential * k_inv_t.transpose();
  std::vector<int> inliers;
  for (int i = 0; i < n; ++i) {
    if (epipolar_distance_px(fundamental, correspondences[i].first, correspondences[i].second) <
        params.threshold_px) {
      inliers.push_back(i);
    }
  }
  if (static_cast<int>(inliers.size()) < params.min_inliers) inliers = best_inliers;
  essential = fit_essential(correspondences, cam, inliers);

  Decomposition dec = decompose_essential(essential, correspondences, cam, inliers);

  RelativePoseUpToScale result;
  result.inlier_indices = inliers;
  result.rotation = dec.rotation;
  result.direction = dec.direction.normalized();

  double median_parallax = 0.0;
  if (!dec.parallaxes_rad.empty()) {
    std::vector<double> p = dec.parallaxes_rad;
    std::nth_element(p.begin(), p.begin() + p.size() / 2, p.end());
    median_parallax = p[p.size() / 2];
  }
  constexpr double kMinParallaxRad = 0.5 * M_PI / 180.0;
  if (median_parallax < kMinParallaxRad) {
    result.degenerate_translation = true;
    result.rotation = rotation_only_fit(correspondences, cam, inliers);
  }
  return result;
}

}  // namespace vantage::frontend
