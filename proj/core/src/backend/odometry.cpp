// SPDX-License-Identifier: Apache-2.0

#include "vantage/backend/odometry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace vantage::backend {

namespace {

struct Accumulator {
  Pose pose;                         // composed measurement so far
  Matrix6d cov = Matrix6d::Zero();   // covariance on the decoupled tangent

  // Appends one step: pose <- pose * step, covariance by first-order
  // propagation (rotation block first).
  void push(const Pose& step, const Matrix6d& step_cov) {
    const Matrix3d r_a = pose.rotation().matrix();
    const Matrix3d r_b = step.rotation().matrix();
    const Vector3d& t_b = step.translation();

    Matrix6d f_a = Matrix6d::Zero();
    f_a.block<3, 3>(0, 0) = r_b.transpose();
    f_a.block<3, 3>(3, 0) = -r_a * skew(t_b);
    f_a.block<3, 3>(3, 3) = Matrix3d::Identity();

    Matrix6d f_b = Matrix6d::Zero();
    f_b.block<3, 3>(0, 0) = Matrix3d::Identity();
    f_b.block<3, 3>(3, 3) = r_a;

    cov = f_a * cov * f_a.transpose() + f_b * step_cov * f_b.transpose();
    pose = pose * step;
  }
};

// Relative pose from fraction a to fraction b of one increment, geodesic.
Pose fractional(const Pose& delta, double a, double b) {
  const Pose pa = interpolate(Pose::identity(), delta, a);
  const Pose pb = interpolate(Pose::identity(), delta, b);
  return pa.inverse() * pb;
}

}  // namespace

RelativePoseMeasurement chain_increments(std::span<const sim::OdometryIncrement> log, double t0,
                                         double t1, const OdometryNoise& noise) {
  if (t0 >= t1) throw std::invalid_argument("chain_increments: need t0 < t1");
  if (log.empty()) throw CoverageError("chain_increments: empty odometry log");

  constexpr double kEps = 1e-9;
  if (log.front().t0 > t0 + kEps || log.back().t1 < t1 - kEps) {
    throw CoverageError("chain_increments: log does not cover the requested interval");
  }

  // Variance floored so noise-free logs still yield finite information.
  const double var_rot = std::max(noise.sigma_rot_rad * noise.sigma_rot_rad, 1e-10);
  const double var_trans = std::max(noise.sigma_trans_m * noise.sigma_trans_m, 1e-10);
  Matrix6d step_cov = Matrix6d::Zero();
  step_cov.block<3, 3>(0, 0) = var_rot * Matrix3d::Identity();
  step_cov.block<3, 3>(3, 3) = var_trans * Matrix3d::Identity();

  Accumulator acc;
  double covered_until = t0;
  double period_sum = 0.0;
  int period_count = 0;

  for (const sim::OdometryIncrement& inc : log) {
    if (inc.t1 <= t0 + kEps) continue;
    if (inc.t0 >= t1 - kEps) break;
    const double span = inc.t1 - inc.t0;
    period_sum += span;
    ++period_count;
    const double mean_period = period_sum / period_count;
    if (inc.t0 - covered_until > 2.0 * mean_period + kEps) {
      throw CoverageError("chain_increments: gap in odometry log exceeds two sample periods");
    }

    const double lo = std::max(t0, inc.t0);
    const double hi = std::min(t1, inc.t1);
    const double a = (lo - inc.t0) / span;
    const double b = (hi - inc.t0) / span;
    if (b - a <= 0) continue;
    if (a <= kEps / span && b >= 1.0 - kEps / span) {
      acc.push(inc.delta, step_cov);
    } else {
      acc.push(fractional(inc.delta, a, b), (b - a) * step_cov);
    }
    covered_until = std::max(covered_until, hi);
  }

  if (covered_until < t1 - kEps) {
    throw CoverageError("chain_increments: log ends before t1");
  }

  RelativePoseMeasurement m;
  m.transform = acc.pose;
  m.information = acc.cov.inverse();
  m.kind = MeasurementKind::kOdometry;
  return m;
}

}  // namespace vantage::backend
