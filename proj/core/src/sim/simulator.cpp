// SPDX-License-Identifier: Apache-2.0

#include "vantage/sim/simulator.hpp"

#include <cmath>

#include "vantage/sim/rng.hpp"

namespace vantage::sim {

namespace {

Rotation yaw_rotation(double yaw) {
  return Rotation(Eigen::Quaterniond(Eigen::AngleAxisd(yaw, Vector3d::UnitZ())));
}

struct PlanarState {
  Vector3d position;
  double yaw;
};

// Analytic path functions. u is normalized time in [0, 1].
PlanarState evaluate_shape(const ScenarioConfig& c, double u) {
  switch (c.shape) {
    case TrajectoryShape::kStraight: {
      const double x = c.speed_mps * u * c.duration_s;
      return {{x, 0.0, 0.0}, 0.0};
    }
    case TrajectoryShape::kLoop: {
      // One counterclockwise lap, starting at the origin heading +x.
      const double theta = 2.0 * M_PI * u;
      const double r = c.radius_m;
      return {{r * std::sin(theta), r * (1.0 - std::cos(theta)), 0.0}, theta};
    }
    case TrajectoryShape::kFigureEight: {
      // Lemniscate of Gerono, parameter offset so the start sits on a lobe
      // extreme; the curve then crosses itself once away from the endpoints.
      const double a = c.radius_m;
      const double w = M_PI / 2.0 + 2.0 * M_PI * u;
      const double x = a * (std::sin(w) - 1.0);
      const double y = 0.5 * a * std::sin(2.0 * w);
      const double dx = a * std::cos(w);
      const double dy = a * std::cos(2.0 * w);
      return {{x, y, 0.0}, std::atan2(dy, dx)};
    }
    case TrajectoryShape::kRampLoop: {
      // Two laps with a smooth climb to ramp_height_m and back: the halfway
      // pose sits directly above the start, one storey up.
      const double theta = 4.0 * M_PI * u;
      const double r = c.radius_m;
      const double z = 0.5 * c.ramp_height_m * (1.0 - std::cos(2.0 * M_PI * u));
      return {{r * std::sin(theta), r * (1.0 - std::cos(theta)), z}, theta};
    }
  }
  throw ConfigError("generate_trajectory: unknown shape");
}

bool camera_occluded(const ScenarioConfig& c, int camera_id, double t) {
  for (const auto& w : c.occlusions) {
    if (w.camera_id == camera_id && t >= w.begin_s && t <= w.end_s) return true;
  }
  return false;
}

}  // namespace

Trajectory generate_trajectory(const ScenarioConfig& config) {
  config.validate();
  const auto steps = static_cast<std::int64_t>(std::llround(config.duration_s * config.odometry_rate_hz));
  std::vector<TimedPose> samples;
  samples.reserve(steps + 1);
  for (std::int64_t k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / config.odometry_rate_hz;
    const PlanarState s = evaluate_shape(config, static_cast<double>(k) / static_cast<double>(steps));
    samples.push_back({t, Pose(yaw_rotation(s.yaw), s.position)});
  }
  return Trajectory(std::move(samples));
}

Dataset simulate_sensors(const Trajectory& traj, const ScenarioConfig& config) {
  config.validate();
  if (traj.size() < 2) throw ConfigError("simulate_sensors: trajectory too short");
  const double traj_rate =
      (traj.size() - 1) / (traj.back().timestamp - traj.front().timestamp);
  if (traj_rate + 1e-9 < config.odometry_rate_hz) {
    throw ConfigError("simulate_sensors: trajectory sampled below the odometry rate");
  }

  Dataset ds;
  ds.config = config;
  ds.ground_truth = traj;
  ds.rig = default_camera_rig();

  // Landmarks in a corridor along the path, heights 0-5 m.
  {
    Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    ds.landmarks.reserve(config.landmark_count);
    for (int i = 0; i < config.landmark_count; ++i) {
      const double t = rng.uniform(traj.front().timestamp, traj.back().timestamp);
      const Pose base = traj.at(t);
      const double side = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      const double lateral = side * rng.uniform(3.0, 15.0);
      const double forward = rng.uniform(-3.0, 3.0);
      const double height = rng.uniform(0.0, 5.0);
      Vector3d p = base * Vector3d(forward, lateral, 0.0);
      p.z() = base.translation().z() + height;
      ds.landmarks.push_back(p);
    }
  }

  // Camera clock, shared across the rig.
  const auto frames =
      static_cast<std::int64_t>(std::llround(config.duration_s * config.camera_rate_hz));
  ds.frame_timestamps.reserve(frames + 1);
  for (std::int64_t f = 0; f <= frames; ++f) {
    ds.frame_timestamps.push_back(static_cast<double>(f) / config.camera_rate_hz);
  }

  // Per-camera tracklets.
  constexpr double kMinRange = 0.5;
  constexpr double kMaxRange = 60.0;
  ds.tracks.resize(ds.rig.size());
  for (size_t cam_id = 0; cam_id < ds.rig.size(); ++cam_id) {
    Rng rng(config.seed ^ (0xc2b2ae3d27d4eb4fULL + cam_id));
    const CameraModel& cam = ds.rig[cam_id];
    for (double t : ds.frame_timestamps) {
      if (camera_occluded(config, static_cast<int>(cam_id), t)) continue;
      const Pose body = traj.at(t);
      const Pose T_wc = body * cam.T_body_camera;
      const Pose T_cw = T_wc.inverse();
      for (size_t lm = 0; lm < ds.landmarks.size(); ++lm) {
        const Vector3d p_c = T_cw * ds.landmarks[lm];
        const double range = p_c.norm();
        if (range < kMinRange || range > kMaxRange) continue;
        const auto pixel = cam.project(p_c);
        if (!pixel) continue;
        TrackObservation obs;
        obs.track_id = static_cast<std::int64_t>(lm);
        obs.timestamp = t;
        if (rng.uniform01() < config.track_outlier_rate) {
          obs.pixel = Vector2d(rng.uniform(0.0, cam.width), rng.uniform(0.0, cam.height));
          obs.is_outlier = true;
        } else {
          const double sigma = config.pixel_noise_sigma_px;
          Vector2d noise(rng.normal(), rng.normal());
          if (sigma > 0) {
            while (noise.norm() >= 6.0) noise = Vector2d(rng.normal(), rng.normal());
          }
          obs.pixel = *pixel + sigma * noise;
          obs.is_outlier = false;
        }
        ds.tracks[cam_id].push_back(obs);
      }
    }
  }

  // Odometry increments at the odometry rate, noise injected on the
  // decoupled tangent of each step.
  {
    Rng rng(config.seed ^ 0xa0761d6478bd642fULL);
    const auto steps =
        static_cast<std::int64_t>(std::llround(config.duration_s * config.odometry_rate_hz));
    ds.odometry.reserve(steps);
    for (std::int64_t k = 0; k < steps; ++k) {
      const double t0 = static_cast<double>(k) / config.odometry_rate_hz;
      const double t1 = static_cast<double>(k + 1) / config.odometry_rate_hz;
      Twist x = log_map(between(traj.at(t0), traj.at(t1)));
      for (int i = 0; i < 3; ++i) x.omega[i] += config.odometry_sigma_rot_rad * rng.normal();
      for (int i = 0; i < 3; ++i) x.v[i] += config.odometry_sigma_trans_m * rng.normal();
      ds.odometry.push_back({t0, t1, exp_map(x)});
    }
  }

  // Ground-plane samples: pixels drawn in each camera, intersected with the
  // world z = 0 plane. These stand in for CNN ground masks.
  {
    Rng rng(config.seed ^ 0xe7037ed1a0b428dbULL);
    constexpr double kMaxGroundRange = 25.0;
    for (double t : ds.frame_timestamps) {
      for (size_t cam_id = 0; cam_id < ds.rig.size(); ++cam_id) {
        if (camera_occluded(config, static_cast<int>(cam_id), t)) continue;
        const CameraModel& cam = ds.rig[cam_id];
        const Pose T_wc = traj.at(t) * cam.T_body_camera;
        for (int i = 0; i < config.ground_points_per_frame; ++i) {
          const Vector2d pixel(rng.uniform(0.0, cam.width), rng.uniform(0.0, cam.height));
          const Vector3d dir = T_wc.rotation() * cam.backproject_ray(pixel);
          const Vector3d origin = T_wc.translation();
          if (dir.z() >= -1e-9) continue;  // ray does not descend to the plane
          const double s = -origin.z() / dir.z();
          if (s <= 0.0 || s > kMaxGroundRange) continue;
          Vector3d p = origin + s * dir;
          p.z() = 0.0;
          ds.ground_points.push_back({t, static_cast<int>(cam_id), p});
        }
      }
    }
  }

  return ds;
}

}  // namespace vantage::sim
