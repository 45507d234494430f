// SPDX-License-Identifier: Apache-2.0
//
// Deterministic synthetic-world generator: car-like trajectories, a landmark
// field, a four-camera rig with per-camera feature tracklets, high-rate
// odometry increments and ground-plane samples.

#pragma once

#include <cstdint>
#include <vector>

#include "vantage/camera.hpp"
#include "vantage/sim/scenario.hpp"
#include "vantage/trajectory.hpp"

namespace vantage::sim {

struct TrackObservation {
  std::int64_t track_id = 0;
  double timestamp = 0.0;
  Vector2d pixel = Vector2d::Zero();
  bool is_outlier = false;
};

struct OdometryIncrement {
  double t0 = 0.0;
  double t1 = 0.0;
  Pose delta;  // body-frame relative pose over [t0, t1]
};

struct GroundPointObservation {
  double timestamp = 0.0;
  int camera_id = 0;
  Vector3d point_world = Vector3d::Zero();  // on the z = 0 plane
};

/// A complete synthetic sensor log. Immutable after creation.
struct Dataset {
  ScenarioConfig config;
  Trajectory ground_truth;  // sampled at the odometry rate
  std::vector<Vector3d> landmarks;
  std::vector<CameraModel> rig;
  std::vector<double> frame_timestamps;               // shared camera clock
  std::vector<std::vector<TrackObservation>> tracks;  // one stream per camera
  std::vector<OdometryIncrement> odometry;
  std::vector<GroundPointObservation> ground_points;
};

/// C1-smooth car-like path sampled at the odometry rate. Loop shapes return
/// to their start; see ScenarioConfig for the shape parameters.
Trajectory generate_trajectory(const ScenarioConfig& config);

/// Simulates the full sensor suite along `traj`. All randomness derives from
/// config.seed; each camera consumes an independent stream so occlusions on
/// one camera leave the others untouched.
Dataset simulate_sensors(const Trajectory& traj, const ScenarioConfig& config);

inline Dataset generate_dataset(const ScenarioConfig& config) {
  return simulate_sensors(generate_trajectory(config), config);
}

}  // namespace vantage::sim
