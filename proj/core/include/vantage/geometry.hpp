// SPDX-License-Identifier: Apache-2.0
//
// SO(3)/SE(3) primitives used by every other module: composition, inversion,
// exponential/logarithm charts and pose interpolation.
//
// The tangent chart is deliberately decoupled (SO(3) x R^3): the rotation
// component goes through the SO(3) log/exp while the translation component is
// taken verbatim. Relative-pose residuals elsewhere in the library rely on
// this exact chart.

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <stdexcept>

namespace vantage {

using Matrix3d = Eigen::Matrix3d;
using Matrix6d = Eigen::Matrix<double, 6, 6>;
using Vector2d = Eigen::Vector2d;
using Vector3d = Eigen::Vector3d;
using Vector6d = Eigen::Matrix<double, 6, 1>;

/// Thrown when a rotation logarithm is requested too close to the cut locus
/// (rotation angle >= pi - 1e-6). The canonical chart does not cover it.
class ChartBoundaryError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Skew-symmetric matrix such that skew(v) * u = v x u.
Matrix3d skew(const Vector3d& v);

/// Rodrigues exponential so(3) -> SO(3).
Matrix3d so3_exp(const Vector3d& omega);

/// Logarithm SO(3) -> so(3), canonical branch with angle in [0, pi).
/// Throws ChartBoundaryError when the angle reaches pi - 1e-6.
Vector3d so3_log(const Matrix3d& rotation);

/// Right Jacobian of SO(3) at omega: Exp(omega + d) ~ Exp(omega) Exp(Jr d).
Matrix3d so3_right_jacobian(const Vector3d& omega);

/// Inverse of the right Jacobian of SO(3).
Matrix3d so3_right_jacobian_inverse(const Vector3d& omega);

/// Rotation on SO(3), stored as a unit quaternion.
class Rotation {
 public:
  Rotation() : q_(Eigen::Quaterniond::Identity()) {}
  explicit Rotation(const Eigen::Quaterniond& q) : q_(q.normalized()) {}
  explicit Rotation(const Matrix3d& m) : q_(m) { q_.normalize(); }

  static Rotation identity() { return Rotation(); }
  static Rotation exp(const Vector3d& omega) { return Rotation(Matrix3d(so3_exp(omega))); }

  Vector3d log() const { return so3_log(matrix()); }
  Matrix3d matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }

  Rotation inverse() const { return Rotation(q_.conjugate()); }
  Rotation operator*(const Rotation& other) const { return Rotation(q_ * other.q_); }
  Vector3d operator*(const Vector3d& v) const { return q_ * v; }

  /// Rotation angle in [0, pi].
  double angle() const;

  /// Geodesic distance to another rotation, radians.
  double angular_distance(const Rotation& other) const {
    return (inverse() * other).angle();
  }

 private:
  Eigen::Quaterniond q_;
};

/// Decoupled tangent element: omega from the rotation log, v the translation.
struct Twist {
  Vector3d omega = Vector3d::Zero();
  Vector3d v = Vector3d::Zero();

  Vector6d vector() const {
    Vector6d x;
    x << omega, v;
    return x;
  }
  static Twist from_vector(const Vector6d& x) { return {x.head<3>(), x.tail<3>()}; }
};

/// Rigid transform on SE(3).
class Pose {
 public:
  Pose() = default;
  Pose(const Rotation& rotation, const Vector3d& translation)
      : rotation_(rotation), translation_(translation) {}

  static Pose identity() { return Pose(); }

  const Rotation& rotation() const { return rotation_; }
  const Vector3d& translation() const { return translation_; }

  Pose operator*(const Pose& other) const {
    return Pose(rotation_ * other.rotation_, translation_ + rotation_ * other.translation_);
  }
  Vector3d operator*(const Vector3d& p) const { return translation_ + rotation_ * p; }

  Pose inverse() const {
    const Rotation rinv = rotation_.inverse();
    return Pose(rinv, -(rinv * translation_));
  }

 private:
  Rotation rotation_;
  Vector3d translation_ = Vector3d::Zero();
};

inline Pose compose(const Pose& a, const Pose& b) { return a * b; }
inline Pose inverse(const Pose& a) { return a.inverse(); }

/// between(a, b) = a^-1 * b, the transform of b expressed in a's frame.
inline Pose between(const Pose& a, const Pose& b) { return a.inverse() * b; }

/// Decoupled chart log: omega = Log(R), v = t.
/// Throws ChartBoundaryError for rotation angles >= pi - 1e-6.
Twist log_map(const Pose& p);

/// Decoupled chart exp: R = Exp(omega), t = v.
Pose exp_map(const Twist& x);

/// Constant-angular-velocity geodesic on rotation, linear on translation.
/// alpha must lie in [0, 1]; endpoints are reproduced exactly.
Pose interpolate(const Pose& a, const Pose& b, double alpha);

}  // namespace vantage
