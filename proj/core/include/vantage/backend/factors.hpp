// SPDX-License-Identifier: Apache-2.0
//
// Factor types shared by the fixed-lag smoother and the pose-graph optimizer.
// Residuals live on the decoupled SO(3) x R^3 tangent: rotation rows first,
// translation rows second. Pose retraction: R <- R Exp(dtheta), t <- t + dt.

#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "vantage/camera.hpp"
#include "vantage/geometry.hpp"

namespace vantage::backend {

using StateId = std::int64_t;
using LandmarkId = std::int64_t;

/// Packs a per-camera track into a landmark identifier. Tracks are never
/// shared across cameras, so every (camera, track) pair is its own landmark.
inline LandmarkId make_landmark_id(int camera_id, std::int64_t track_id) {
  return (static_cast<std::int64_t>(camera_id + 1) << 40) | track_id;
}

enum class MeasurementKind { kOdometry, kLoopFull, kLoopScaleless, kLoopRotationOnly };

/// A measured relative transform between states i and j with a 6x6
/// information matrix (rotation block first, decoupled-chart ordering).
struct RelativePoseMeasurement {
  StateId i = 0;
  StateId j = 0;
  Pose transform;  // measured T_ij, frame of i
  Matrix6d information = Matrix6d::Identity();
  MeasurementKind kind = MeasurementKind::kOdometry;
};

struct ProjectionFactor {
  StateId state = 0;
  LandmarkId landmark = 0;
  int camera_id = 0;
  Vector2d pixel = Vector2d::Zero();
  double sigma_px = 1.0;
  CameraModel camera;
};

struct RelativePoseFactor {
  RelativePoseMeasurement measurement;
};

struct PriorFactor {
  StateId state = 0;
  Pose mean;
  Matrix6d information = Matrix6d::Identity();
};

/// Gaussian prior over several poses produced by marginalization, stored in
/// square-root form: residual = sqrt_info * local(x) - rhs, where local(x)
/// stacks per-state [Log(R_lin^T R); t - t_lin].
struct MarginalPriorFactor {
  std::vector<StateId> states;
  std::vector<Pose> linearization;
  Eigen::MatrixXd sqrt_info;
  Eigen::VectorXd rhs;
};

using Factor = std::variant<ProjectionFactor, RelativePoseFactor, PriorFactor, MarginalPriorFactor>;

/// Variable assignment for a factor graph.
struct Values {
  std::map<StateId, Pose> poses;
  std::map<LandmarkId, Vector3d> landmarks;
};

/// Relative-pose residual for a given measurement and state pair:
/// r = [Log(Rbar^T Ri^T Rj); Rbar^T (Ri^T (tj - ti) - tbar)].
Vector6d relative_pose_residual(const RelativePoseMeasurement& m, const Pose& xi, const Pose& xj);

/// Factor value r^T Omega r of Eq-style between factors.
double relative_pose_factor_value(const RelativePoseMeasurement& m, const Pose& xi,
                                  const Pose& xj);

}  // namespace vantage::backend
