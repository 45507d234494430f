// SPDX-License-Identifier: Apache-2.0

#include "vantage/loop/loopclosure.hpp"

#include <algorithm>
#include <cmath>

#include "vantage/frontend/pnp.hpp"
#include "vantage/sim/rng.hpp"

namespace vantage::loop {

LoopMode loop_mode_from_string(const std::string& name) {
  if (name == "pnp") return LoopMode::kPnp;
  if (name == "scaleless") return LoopMode::kScaleless;
  if (name == "rotonly") return LoopMode::kRotationOnly;
  throw std::invalid_argument("unknown loop mode: " + name);
}

std::string to_string(LoopMode mode) {
  switch (mode) {
    case LoopMode::kPnp: return "pnp";
    case LoopMode::kScaleless: return "scaleless";
    case LoopMode::kRotationOnly: return "rotonly";
  }
  throw std::invalid_argument("invalid loop mode enum");
}

namespace {

using ObservationIndex = std::map<double, std::map<std::int64_t, Vector2d>>;

ObservationIndex index_observations(const sim::Dataset& dataset, int camera_id) {
  ObservationIndex index;
  for (const sim::TrackObservation& obs : dataset.tracks.at(camera_id)) {
    index[obs.timestamp][obs.track_id] = obs.pixel;
  }
  return index;
}

// Shared-track pixel pairs between two frames: (pixel at a, pixel at b).
std::vector<std::pair<Vector2d, Vector2d>> shared_pixels(const ObservationIndex& index, double ta,
                                                         double tb) {
  std::vector<std::pair<Vector2d, Vector2d>> pairs;
  const auto ia = index.find(ta);
  const auto ib = index.find(tb);
  if (ia == index.end() || ib == index.end()) return pairs;
  for (const auto& [track, pixel_a] : ia->second) {
    const auto hit = ib->second.find(track);
    if (hit != ib->second.end()) pairs.emplace_back(pixel_a, hit->second);
  }
  return pairs;
}

// (pixel at tb, landmark estimate from `map`) pairs, subsampled.
std::vector<std::pair<Vector2d, Vector3d>> map_matches(
    const ObservationIndex& index, double tb, const std::map<std::int64_t, Vector3d>& map,
    double fraction, sim::Rng& rng) {
  std::vector<std::pair<Vector2d, Vector3d>> pairs;
  const auto ib = index.find(tb);
  if (ib == index.end()) return pairs;
  for (const auto& [track, pixel] : ib->second) {
    const auto hit = map.find(track);
    if (hit == map.end()) continue;
    if (rng.uniform01() >= fraction) continue;
    pairs.emplace_back(pixel, hit->second);
  }
  return pairs;
}

}  // namespace

std::vector<LoopCandidate> detect_candidates(const sim::Dataset& dataset,
                                             const std::vector<KeyframeContext>& keyframes,
                                             const LoopParams& params) {
  for (size_t k = 1; k < keyframes.size(); ++k) {
    if (keyframes[k].timestamp <= keyframes[k - 1].timestamp) {
      throw std::invalid_argument("detect_candidates: keyframes must be time-ordered");
    }
  }
  const ObservationIndex index = index_observations(dataset, params.loop_camera_id);
  sim::Rng rng(dataset.config.seed ^ 0x5851f42d4c957f2dULL);

  std::vector<LoopCandidate> candidates;
  for (size_t q = 0; q < keyframes.size(); ++q) {
    const KeyframeContext& query = keyframes[q];

    // Nearest ground-truth revisit, if any.
    int best = -1;
    double best_dist = params.proximity_radius_m;
    for (size_t m = 0; m < q; ++m) {
      const KeyframeContext& match = keyframes[m];
      if (query.timestamp - match.timestamp < params.min_loop_separation_s) continue;
      const double dist =
          (query.gt_pose.translation() - match.gt_pose.translation()).norm();
      if (dist > best_dist) continue;
      const double heading = query.gt_pose.rotation().angular_distance(match.gt_pose.rotation());
      if (heading > params.heading_threshold_rad) continue;
      best = static_cast<int>(m);
      best_dist = dist;
    }
    if (best >= 0) {
      const KeyframeContext& match = keyframes[best];
      LoopCandidate c;
      c.query_state = query.state;
      c.match_state = match.state;
      c.query_time = query.timestamp;
      c.match_time = match.timestamp;
      c.correspondences_2d2d = shared_pixels(index, match.timestamp, query.timestamp);
      c.correspondences_2d3d =
          map_matches(index, query.timestamp, match.landmark_estimates,
                      params.landmark_subsample_fraction, rng);
      if (!c.correspondences_2d2d.empty()) candidates.push_back(std::move(c));
    }

    // Injected false positive: a far-apart pair whose correspondences are
    // internally consistent but belong to the match keyframe's neighborhood.
    if (rng.uniform01() < dataset.config.pr_false_positive_rate) {
      std::vector<size_t> far;
      for (size_t m = 0; m + 1 < keyframes.size() && m < q; ++m) {
        const KeyframeContext& match = keyframes[m];
        if (query.timestamp - match.timestamp < params.min_loop_separation_s) continue;
        const double dist =
            (query.gt_pose.translation() - match.gt_pose.translation()).norm();
        if (dist > 2.0 * params.proximity_radius_m) far.push_back(m);
      }
      if (!far.empty()) {
        const size_t m = far[static_cast<size_t>(rng.uniform_int(0, static_cast<int>(far.size()) - 1))];
        const KeyframeContext& match = keyframes[m];
        const KeyframeContext& decoy = keyframes[m + 1];
        LoopCandidate c;
        c.query_state = query.state;
        c.match_state = match.state;
        c.query_time = query.timestamp;
        c.match_time = match.timestamp;
        c.is_injected_false_positive = true;
        c.correspondences_2d2d = shared_pixels(index, match.timestamp, decoy.timestamp);
        c.correspondences_2d3d =
            map_matches(index, decoy.timestamp, match.landmark_estimates,
                        params.landmark_subsample_fraction, rng);
        if (!c.correspondences_2d2d.empty()) candidates.push_back(std::move(c));
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const LoopCandidate& a, const LoopCandidate& b) {
    return a.query_time != b.query_time ? a.query_time < b.query_time
                                        : a.match_time < b.match_time;
  });
  return candidates;
}

Matrix6d build_information(LoopMode mode, const Vector3d& translation_direction,
                           const Rotation& rbar, const Matrix3d& omega_r, double sigma_trans_m) {
  if (std::abs(translation_direction.norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("build_information: translation direction must be unit-norm");
  }
  Matrix6d info = Matrix6d::Zero();
  info.block<3, 3>(0, 0) = omega_r;
  switch (mode) {
    case LoopMode::kScaleless: {
      const Matrix3d rb = rbar.matrix();
      const Matrix3d projector =
          Matrix3d::Identity() - translation_direction * translation_direction.transpose();
      info.block<3, 3>(3, 3) = rb.transpose() * projector * rb;
      break;
    }
    case LoopMode::kRotationOnly:
      break;  // zero translation information
    case LoopMode::kPnp:
      info.block<3, 3>(3, 3) =
          Matrix3d::Identity() / (sigma_trans_m * sigma_trans_m);
      break;
  }
  return info;
}

std::optional<LoopPoseResult> compute_loop_pose(const LoopCandidate& candidate, LoopMode mode,
                                                const CameraModel& cam,
                                                const Pose& match_body_estimate,
                                                const LoopParams& params) {
  const Matrix3d omega_r =
      Matrix3d::Identity() / (params.sigma_rot_rad * params.sigma_rot_rad);
  frontend::RansacParams ransac = params.ransac;
  ransac.min_inliers = params.min_inliers;

  backend::RelativePoseMeasurement m;
  m.i = candidate.match_state;
  m.j = candidate.query_state;

  try {
    if (mode == LoopMode::kPnp) {
      const auto pnp = frontend::solve_pnp_ransac(candidate.correspondences_2d3d, cam, ransac);
      if (!pnp || static_cast<int>(pnp->inlier_indices.size()) < params.min_inliers) {
        return std::nullopt;
      }
      const Pose query_body = pnp->T_world_camera * cam.T_body_camera.inverse();
      m.transform = match_body_estimate.inverse() * query_body;
      m.information = build_information(LoopMode::kPnp, Vector3d::UnitX(), m.transform.rotation(),
                                        omega_r, params.sigma_trans_m);
      m.kind = backend::MeasurementKind::kLoopFull;
      return LoopPoseResult{m, static_cast<int>(pnp->inlier_indices.size())};
    }

    const auto rel =
        frontend::estimate_relative_pose_up_to_scale(candidate.correspondences_2d2d, cam, ransac);
    if (!rel || static_cast<int>(rel->inlier_indices.size()) < params.min_inliers) {
      return std::nullopt;
    }

    // Conjugate the camera-frame estimate into the body frame. With the
    // extrinsic lever arm the measured translation is offset + s * u with
    // unknown s, so zero information is carried along u.
    const Matrix3d r_e = cam.T_body_camera.rotation().matrix();
    const Vector3d& t_e = cam.T_body_camera.translation();
    const Matrix3d r_body = r_e * rel->rotation.matrix() * r_e.transpose();
    const Vector3d u = (r_e * rel->direction).normalized();
    const Vector3d offset = (Matrix3d::Identity() - r_body) * t_e;

    m.transform = Pose(Rotation(r_body), offset + u);
    if (mode == LoopMode::kScaleless && !rel->degenerate_translation) {
      m.information =
          build_information(LoopMode::kScaleless, u, m.transform.rotation(), omega_r);
      m.kind = backend::MeasurementKind::kLoopScaleless;
    } else {
      m.information =
          build_information(LoopMode::kRotationOnly, u, m.transform.rotation(), omega_r);
      m.kind = backend::MeasurementKind::kLoopRotationOnly;
    }
    return LoopPoseResult{m, static_cast<int>(rel->inlier_indices.size())};
  } catch (const std::invalid_argument&) {
    return std::nullopt;  // too few correspondences for the solver
  }
}

}  // namespace vantage::loop
