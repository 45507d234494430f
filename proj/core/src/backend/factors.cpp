// SPDX-License-Identifier: Apache-2.0

#include "vantage/backend/factors.hpp"

namespace vantage::backend {

Vector6d relative_pose_residual(const RelativePoseMeasurement& m, const Pose& xi, const Pose& xj) {
  const Matrix3d ri = xi.rotation().matrix();
  const Matrix3d rj = xj.rotation().matrix();
  const Matrix3d rbar = m.transform.rotation().matrix();
  const Vector3d t_ij = ri.transpose() * (xj.translation() - xi.translation());
  Vector6d r;
  r.head<3>() = so3_log(rbar.transpose() * ri.transpose() * rj);
  r.tail<3>() = rbar.transpose() * (t_ij - m.transform.translation());
  return r;
}

double relative_pose_factor_value(const RelativePoseMeasurement& m, const Pose& xi,
                                  const Pose& xj) {
  const Vector6d r = relative_pose_residual(m, xi, xj);
  return r.dot(m.information * r);
}

}  // namespace vantage::backend
