// SPDX-License-Identifier: Apache-2.0

#include "vantage/geometry.hpp"

#include <cmath>

namespace vantage {

namespace {
constexpr double kSmallAngle = 1e-10;
constexpr double kChartBoundary = M_PI - 1e-6;
}  // namespace

Matrix3d skew(const Vector3d& v) {
  Matrix3d s;
  // clang-format off
  s <<     0, -v.z(),  v.y(),
       v.z(),      0, -v.x(),
      -v.y(),  v.x(),      0;
  // clang-format on
  return s;
}

Matrix3d so3_exp(const Vector3d& omega) {
  const double theta = omega.norm();
  if (theta < kSmallAngle) {
    // First-order expansion keeps exp(log(R)) round-trips exact near identity.
    return Matrix3d::Identity() + skew(omega);
  }
  const Vector3d axis = omega / theta;
  return Eigen::AngleAxisd(theta, axis).toRotationMatrix();
}

Vector3d so3_log(const Matrix3d& rotation) {
  Eigen::Quaterniond q(rotation);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;  // canonical branch, angle in [0, pi]
  const double sin_half = q.vec().norm();
  const double angle = 2.0 * std::atan2(sin_half, q.w());
  if (angle >= kChartBoundary) {
    throw ChartBoundaryError("so3_log: rotation angle too close to pi");
  }
  if (sin_half < kSmallAngle) {
    return 2.0 * q.vec();  // sin(x) ~ x
  }
  return (angle / sin_half) * q.vec();
}

Matrix3d so3_right_jacobian(const Vector3d& omega) {
  const double theta = omega.norm();
  const Matrix3d w = skew(omega);
  if (theta < 1e-6) {
    return Matrix3d::Identity() - 0.5 * w + (1.0 / 6.0) * w * w;
  }
  const double theta2 = theta * theta;
  const double a = (1.0 - std::cos(theta)) / theta2;
  const double b = (theta - std::sin(theta)) / (theta2 * theta);
  return Matrix3d::Identity() - a * w + b * w * w;
}

Matrix3d so3_right_jacobian_inverse(const Vector3d& omega) {
  const double theta = omega.norm();
  const Matrix3d w = skew(omega);
  if (theta < 1e-6) {
    return Matrix3d::Identity() + 0.5 * w + (1.0 / 12.0) * w * w;
  }
  const double c = 1.0 / (theta * theta) -
                   (1.0 + std::cos(theta)) / (2.0 * theta * std::sin(theta));
  return Matrix3d::Identity() + 0.5 * w + c * w * w;
}

double Rotation::angle() const {
  Eigen::Quaterniond q = q_;
  if (q.w() < 0) q.coeffs() *= -1.0;
  return 2.0 * std::atan2(q.vec().norm(), q.w());
}

Twist log_map(const Pose& p) {
  return Twist{p.rotation().log(), p.translation()};
}

Pose exp_map(const Twist& x) {
  return Pose(Rotation::exp(x.omega), x.v);
}

Pose interpolate(const Pose& a, const Pose& b, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) {
    throw std::invalid_argument("interpolate: alpha outside [0, 1]");
  }
  if (alpha == 0.0) return a;
  if (alpha == 1.0) return b;
  const Vector3d omega = (a.rotation().inverse() * b.rotation()).log();
  const Rotation r = a.rotation() * Rotation::exp(alpha * omega);
  const Vector3d t = (1.0 - alpha) * a.translation() + alpha * b.translation();
  return Pose(r, t);
}

}  // namespace vantage
