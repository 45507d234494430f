// SPDX-License-Identifier: Apache-2.0
//
// Single fixed-lag smoothing backend fusing every camera frontend plus the
// external odometry stream: factor construction, windowed nonlinear least
// squares over a receding horizon, Schur-complement marginalization.

#pragma once

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "vantage/backend/marginalize.hpp"
#include "vantage/backend/odometry.hpp"
#include "vantage/backend/optimizer.hpp"
#include "vantage/frontend/frontend.hpp"
#include "vantage/frontend/triangulate.hpp"
#include "vantage/trajectory.hpp"

namespace vantage::backend {

struct SmootherParams {
  double horizon_s = 10.0;
  bool use_odometry_factors = true;
  double pixel_sigma_px = 1.0;
  OdometryNoise odometry_noise;
  LmOptions lm;
  frontend::TriangulationOptions triangulation{.robust = true};
  double prior_sigma_rot_rad = 1e-4;
  double prior_sigma_trans_m = 1e-4;
  Pose first_pose_prior;  // gauge anchor for the very first keyframe
  // Projection factors beyond this whitened residual after convergence are
  // outliers and get pruned (simulated noise is capped at 6 sigma).
  double prune_threshold_sigma = 8.0;
  int max_prune_rounds = 3;
  // Landmarks activate only once their observation rays subtend this much
  // parallax; below it triangulated depth is too biased to constrain poses.
  double min_activation_parallax_rad = 2.0 * M_PI / 180.0;
};

struct KeyframeDiagnostics {
  StateId state = 0;
  double timestamp = 0.0;
  std::map<int, int> factors_per_camera;
  double cost = 0.0;
  int iterations = 0;
};

/// Builds the factors for one keyframe epoch: one projection factor per
/// inlier observation, one odometry factor from the previous keyframe (or a
/// prior for the very first keyframe). Landmark bookkeeping lives in the
/// smoother; this free function exposes the per-epoch factor construction
/// contract for direct testing.
std::vector<Factor> build_keyframe_factors(
    const std::vector<frontend::FrontendOutput>& outputs, const std::vector<CameraModel>& rig,
    std::span<const sim::OdometryIncrement> odometry_log,
    std::optional<double> previous_keyframe_time, const Pose& first_keyframe_prior_mean,
    const SmootherParams& params);

class FixedLagSmoother {
 public:
  FixedLagSmoother(std::vector<CameraModel> rig, SmootherParams params)
      : rig_(std::move(rig)), params_(params) {}

  /// Processes one keyframe epoch: every frontend output sharing `timestamp`.
  /// Outputs may arrive in any camera order; processing is deterministic.
  KeyframeDiagnostics add_keyframe(StateId id, double timestamp,
                                   std::vector<frontend::FrontendOutput> outputs,
                                   std::span<const sim::OdometryIncrement> odometry_log);

  /// All keyframe estimates, marginalized ones frozen at their exit values.
  Trajectory trajectory() const;

  const Values& window_values() const { return values_; }
  const std::vector<Factor>& window_factors() const { return factors_; }
  const std::vector<KeyframeDiagnostics>& diagnostics() const { return diagnostics_; }

  /// Relative-pose measurement between consecutive keyframes, for the pose
  /// graph downstream.
  std::vector<RelativePoseMeasurement> keyframe_odometry() const { return keyframe_odometry_; }

 private:
  struct LandmarkRecord {
    std::vector<std::pair<StateId, frontend::TrackPixel>> pending;  // per keyframe
    std::vector<int> pending_camera;
    bool active = false;
  };

  void activate_landmarks();
  bool prune_outlier_factors();
  void marginalize_old_states();

  std::vector<CameraModel> rig_;
  SmootherParams params_;

  Values values_;
  std::vector<Factor> factors_;
  std::deque<std::pair<StateId, double>> window_;  // (state, timestamp), time order
  std::map<LandmarkId, LandmarkRecord> landmark_registry_;

  std::optional<StateId> previous_state_;
  std::optional<double> previous_time_;
  Pose previous_pose_estimate_;
  std::optional<Pose> velocity_guess_;  // last between-keyframe motion

  std::map<StateId, TimedPose> finished_;  // marginalized keyframes
  std::map<StateId, double> window_times_;
  std::vector<KeyframeDiagnostics> diagnostics_;
  std::vector<RelativePoseMeasurement> keyframe_odometry_;
};

}  // namespace vantage::backend
