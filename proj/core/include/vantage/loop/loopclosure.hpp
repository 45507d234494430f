// SPDX-License-Identifier: Apache-2.0
//
// Loop-closure candidate generation (a ground-truth proximity oracle with
// injected false positives stands in for appearance-based place recognition)
// and relative-pose computation in three modes: PnP, scale-less and
// rotation-only.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "vantage/backend/factors.hpp"
#include "vantage/frontend/two_view.hpp"
#include "vantage/sim/simulator.hpp"

namespace vantage::loop {

enum class LoopMode { kPnp, kScaleless, kRotationOnly };

LoopMode loop_mode_from_string(const std::string& name);
std::string to_string(LoopMode mode);

struct LoopParams {
  double min_loop_separation_s = 10.0;
  double proximity_radius_m = 5.0;
  double heading_threshold_rad = 30.0 * M_PI / 180.0;
  int min_inliers = 8;
  double sigma_rot_rad = 0.02;               // loop rotation information
  double sigma_trans_m = 0.1;                // full-pose translation information
  double landmark_subsample_fraction = 0.25; // sparsity of the PnP 3D map
  int loop_camera_id = 0;
  frontend::RansacParams ransac;
};

/// What the detector knows about one keyframe: its ground-truth pose (the
/// place-recognition oracle), the VIO estimate and the VIO landmark map
/// snapshot (track id -> estimated world point) available at that time.
struct KeyframeContext {
  backend::StateId state = 0;
  double timestamp = 0.0;
  Pose gt_pose;
  Pose vio_pose;
  std::map<std::int64_t, Vector3d> landmark_estimates;
};

struct LoopCandidate {
  backend::StateId query_state = 0;
  backend::StateId match_state = 0;
  double query_time = 0.0;
  double match_time = 0.0;
  // (match pixel, query pixel) pairs from shared tracks of the loop camera.
  std::vector<std::pair<Vector2d, Vector2d>> correspondences_2d2d;
  // (query pixel, match-time landmark estimate) pairs for PnP.
  std::vector<std::pair<Vector2d, Vector3d>> correspondences_2d3d;
  bool is_injected_false_positive = false;
};

/// Emits candidates where ground-truth poses sit within the proximity radius
/// and heading threshold, separated by at least min_loop_separation (one per
/// query, nearest match wins). With pr_false_positive_rate from the dataset
/// config, a spurious far-apart candidate is injected whose correspondences
/// are self-consistent but belong to the wrong keyframe pair.
std::vector<LoopCandidate> detect_candidates(const sim::Dataset& dataset,
                                             const std::vector<KeyframeContext>& keyframes,
                                             const LoopParams& params = {});

/// Builds the 6x6 loop-closure information matrix. Rotation block is omega_r
/// in every mode; translation block: scale-less -> the orthogonal projector
/// of the measured direction conjugated into the residual frame,
/// Rbar^T (I - t t^T) Rbar; rotation-only -> zero; full -> sigma_t^-2 I.
/// `translation_direction` must be unit-norm.
Matrix6d build_information(LoopMode mode, const Vector3d& translation_direction,
                           const Rotation& rbar, const Matrix3d& omega_r,
                           double sigma_trans_m = 0.1);

struct LoopPoseResult {
  backend::RelativePoseMeasurement measurement;
  int num_inliers = 0;
};

/// Computes the relative-pose measurement for one candidate. Solver errors
/// and consensus below min_inliers reject the candidate (nullopt).
/// `match_body_estimate` anchors the PnP result in the map frame.
std::optional<LoopPoseResult> compute_loop_pose(const LoopCandidate& candidate, LoopMode mode,
                                                const CameraModel& cam,
                                                const Pose& match_body_estimate,
                                                const LoopParams& params = {});

}  // namespace vantage::loop
