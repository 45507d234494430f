// SPDX-License-Identifier: Apache-2.0

#include "vantage/backend/smoother.hpp"

#include <algorithm>
#include <set>

namespace vantage::backend {

namespace {

Matrix6d prior_information(const SmootherParams& p) {
  Matrix6d info = Matrix6d::Zero();
  info.block<3, 3>(0, 0) =
      Matrix3d::Identity() / (p.prior_sigma_rot_rad * p.prior_sigma_rot_rad);
  info.block<3, 3>(3, 3) =
      Matrix3d::Identity() / (p.prior_sigma_trans_m * p.prior_sigma_trans_m);
  return info;
}

}  // namespace

std::vector<Factor> build_keyframe_factors(
    const std::vector<frontend::FrontendOutput>& outputs, const std::vector<CameraModel>& rig,
    std::span<const sim::OdometryIncrement> odometry_log,
    std::optional<double> previous_keyframe_time, const Pose& first_keyframe_prior_mean,
    const SmootherParams& params) {
  if (outputs.empty()) {
    throw std::invalid_argument("build_keyframe_factors: need at least one frontend output");
  }
  const StateId state = outputs.front().keyframe_id;
  const double timestamp = outputs.front().timestamp;

  std::vector<Factor> factors;
  for (const frontend::FrontendOutput& out : outputs) {
    for (const frontend::TrackPixel& track : out.inlier_tracks) {
      ProjectionFactor f;
      f.state = state;
      f.landmark = make_landmark_id(out.camera_id, track.track_id);
      f.camera_id = out.camera_id;
      f.pixel = track.pixel;
      f.sigma_px = params.pixel_sigma_px;
      f.camera = rig.at(out.camera_id);
      factors.emplace_back(std::move(f));
    }
  }

  if (previous_keyframe_time) {
    RelativePoseMeasurement m =
        chain_increments(odometry_log, *previous_keyframe_time, timestamp, params.odometry_noise);
    m.i = state - 1;
    m.j = state;
    factors.emplace_back(RelativePoseFactor{std::move(m)});
  } else {
    factors.emplace_back(PriorFactor{state, first_keyframe_prior_mean, prior_information(params)});
  }
  return factors;
}

KeyframeDiagnostics FixedLagSmoother::add_keyframe(
    StateId id, double timestamp, std::vector<frontend::FrontendOutput> outputs,
    std::span<const sim::OdometryIncrement> odometry_log) {
  if (previous_time_ && timestamp <= *previous_time_) {
    throw std::invalid_argument("add_keyframe: timestamps must be strictly increasing");
  }
  std::sort(outputs.begin(), outputs.end(),
            [](const auto& a, const auto& b) { return a.camera_id < b.camera_id; });

  // Initial estimate: previous pose composed with the chained odometry; the
  // last between-keyframe motion stands in when the log has no coverage.
  Pose initial;
  std::optional<RelativePoseMeasurement> odom;
  if (previous_state_) {
    try {
      odom = chain_increments(odometry_log, *previous_time_, timestamp, params_.odometry_noise);
      initial = previous_pose_estimate_ * odom->transform;
    } catch (const CoverageError&) {
      initial = velocity_guess_ ? previous_pose_estimate_ * *velocity_guess_
                                : previous_pose_estimate_;
    }
  } else {
    initial = params_.first_pose_prior;
  }
  values_.poses[id] = initial;
  window_.emplace_back(id, timestamp);
  window_times_[id] = timestamp;

  if (previous_state_) {
    if (odom) {
      RelativePoseMeasurement edge = *odom;
      edge.i = *previous_state_;
      edge.j = id;
      keyframe_odometry_.push_back(edge);
      if (params_.use_odometry_factors) {
        factors_.emplace_back(RelativePoseFactor{edge});
      }
    }
  } else {
    factors_.emplace_back(PriorFactor{id, initial, prior_information(params_)});
  }

  // Register observations; factors for already-active landmarks go in now.
  for (const frontend::FrontendOutput& out : outputs) {
    for (const frontend::TrackPixel& track : out.inlier_tracks) {
      const LandmarkId lm = make_landmark_id(out.camera_id, track.track_id);
      LandmarkRecord& rec = landmark_registry_[lm];
      if (rec.active) {
        ProjectionFactor f;
        f.state = id;
        f.landmark = lm;
        f.camera_id = out.camera_id;
        f.pixel = track.pixel;
        f.sigma_px = params_.pixel_sigma_px;
        f.camera = rig_.at(out.camera_id);
        factors_.emplace_back(std::move(f));
      } else {
        rec.pending.emplace_back(id, track);
        rec.pending_camera.push_back(out.camera_id);
      }
    }
  }
  activate_landmarks();

  OptimizeResult opt = optimize(factors_, values_, params_.lm);
  // Pruning on a non-converged estimate would amputate valid factors.
  for (int round = 0; round < params_.max_prune_rounds && opt.converged; ++round) {
    if (!prune_outlier_factors()) break;
    opt = optimize(factors_, values_, params_.lm);
  }

  previous_state_ = id;
  if (previous_time_) {
    velocity_guess_ = between(Pose(previous_pose_estimate_), values_.poses.at(id));
  }
  previous_time_ = timestamp;
  previous_pose_estimate_ = values_.poses.at(id);

  KeyframeDiagnostics diag;
  diag.state = id;
  diag.timestamp = timestamp;
  diag.cost = opt.final_cost;
  diag.iterations = opt.iterations;
  for (const Factor& f : factors_) {
    if (const auto* proj = std::get_if<ProjectionFactor>(&f)) {
      diag.factors_per_camera[proj->camera_id] += 1;
    }
  }
  diagnostics_.push_back(diag);

  marginalize_old_states();
  return diag;
}

void FixedLagSmoother::activate_landmarks() {
  for (auto& [lm, rec] : landmark_registry_) {
    if (rec.active || rec.pending.size() < 2) continue;

    std::set<StateId> distinct;
    for (const auto& [state, track] : rec.pending) distinct.insert(state);
    if (distinct.size() < 2) continue;

    std::vector<std::pair<Pose, Vector2d>> observations;
    for (size_t k = 0; k < rec.pending.size(); ++k) {
      const Pose T_wc =
          values_.poses.at(rec.pending[k].first) * rig_.at(rec.pending_camera[k]).T_body_camera;
      observations.emplace_back(T_wc, rec.pending[k].second.pixel);
    }
    const auto point =
        frontend::triangulate(observations, rig_.at(rec.pending_camera.front()),
                              params_.triangulation);
    if (!point) continue;  // deferred until more parallax accumulates

    double max_parallax = 0.0;
    for (size_t a = 0; a < observations.size(); ++a) {
      const Vector3d ra = (*point - observations[a].first.translation()).normalized();
      for (size_t b = a + 1; b < observations.size(); ++b) {
        const Vector3d rb = (*point - observations[b].first.translation()).normalized();
        max_parallax = std::max(
            max_parallax, std::acos(std::clamp(ra.dot(rb), -1.0, 1.0)));
      }
    }
    if (max_parallax < params_.min_activation_parallax_rad) continue;  // deferred

    values_.landmarks[lm] = *point;
    for (size_t k = 0; k < rec.pending.size(); ++k) {
      ProjectionFactor f;
      f.state = rec.pending[k].first;
      f.landmark = lm;
      f.camera_id = rec.pending_camera[k];
      f.pixel = rec.pending[k].second.pixel;
      f.sigma_px = params_.pixel_sigma_px;
      f.camera = rig_.at(rec.pending_camera[k]);
      factors_.emplace_back(std::move(f));
    }
    rec.active = true;
    rec.pending.clear();
    rec.pending_camera.clear();
  }
}

bool FixedLagSmoother::prune_outlier_factors() {
  LmOptions raw = params_.lm;
  raw.huber_on_projection = false;
  const double threshold_sq = params_.prune_threshold_sigma * params_.prune_threshold_sigma;

  std::vector<Factor> kept;
  kept.reserve(factors_.size());
  bool pruned = false;
  std::map<LandmarkId, int> remaining_obs;
  for (Factor& f : factors_) {
    if (const auto* proj = std::get_if<ProjectionFactor>(&f)) {
      if (factor_cost(f, values_, raw) > threshold_sq) {
        pruned = true;
        continue;
      }
      remaining_obs[proj->landmark] += 1;
    }
    kept.push_back(std::move(f));
  }
  if (!pruned) return false;

  // Landmarks left underconstrained go entirely.
  std::set<LandmarkId> dropped;
  for (const auto& [lm, p] : values_.landmarks) {
    if (remaining_obs[lm] < 2) dropped.insert(lm);
  }
  factors_.clear();
  for (Factor& f : kept) {
    if (const auto* proj = std::get_if<ProjectionFactor>(&f)) {
      if (dropped.count(proj->landmark)) continue;
    }
    factors_.push_back(std::move(f));
  }
  for (LandmarkId lm : dropped) {
    values_.landmarks.erase(lm);
    auto it = landmark_registry_.find(lm);
    if (it != landmark_registry_.end()) it->second.active = false;
  }
  return true;
}

void FixedLagSmoother::marginalize_old_states() {
  if (window_.empty()) return;
  const double newest = window_.back().second;
  std::vector<StateId> exiting;
  while (window_.size() > 1 && window_.front().second < newest - params_.horizon_s) {
    exiting.push_back(window_.front().first);
    window_.pop_front();
  }
  if (exiting.empty()) return;
  const std::set<StateId> exiting_set(exiting.begin(), exiting.end());

  for (StateId s : exiting) {
    finished_[s] = {window_times_.at(s), values_.poses.at(s)};
  }

  // Landmark surgery: observations at exiting states are retired; landmarks
  // left with fewer than two in-window observations are dropped entirely.
  std::map<LandmarkId, int> retained_obs;
  for (const Factor& f : factors_) {
    if (const auto* proj = std::get_if<ProjectionFactor>(&f)) {
      if (!exiting_set.count(proj->state)) retained_obs[proj->landmark] += 1;
    }
  }
  std::set<LandmarkId> dropped;
  for (const auto& [lm, p] : values_.landmarks) {
    if (retained_obs[lm] < 2) dropped.insert(lm);
  }

  std::vector<Factor> kept;
  kept.reserve(factors_.size());
  std::vector<Factor> touching;
  for (Factor& f : factors_) {
    if (const auto* proj = std::get_if<ProjectionFactor>(&f)) {
      if (exiting_set.count(proj->state) || dropped.count(proj->landmark)) continue;
      kept.push_back(std::move(f));
      continue;
    }
    const bool exits = std::visit(
        [&](const auto& v) -> bool {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, RelativePoseFactor>) {
            return exiting_set.count(v.measurement.i) || exiting_set.count(v.measurement.j);
          } else if constexpr (std::is_same_v<T, PriorFactor>) {
            return exiting_set.count(v.state) > 0;
          } else if constexpr (std::is_same_v<T, MarginalPriorFactor>) {
            for (StateId s : v.states) {
              if (exiting_set.count(s)) return true;
            }
            return false;
          }
          return false;
        },
        f);
    if (exits) {
      touching.push_back(std::move(f));
    } else {
      kept.push_back(std::move(f));
    }
  }

  MarginalPriorFactor prior = marginalize(touching, values_, exiting);
  factors_ = std::move(kept);
  if (!prior.states.empty() && prior.sqrt_info.rows() > 0) {
    factors_.emplace_back(std::move(prior));
  }

  for (StateId s : exiting) values_.poses.erase(s);
  for (LandmarkId lm : dropped) {
    values_.landmarks.erase(lm);
    auto it = landmark_registry_.find(lm);
    if (it != landmark_registry_.end()) {
      it->second.active = false;
      it->second.pending.clear();
      it->second.pending_camera.clear();
    }
  }
  // Pending observations that reference marginalized states are stale.
  for (auto& [lm, rec] : landmark_registry_) {
    if (rec.pending.empty()) continue;
    std::vector<std::pair<StateId, frontend::TrackPixel>> pending;
    std::vector<int> cams;
    for (size_t k = 0; k < rec.pending.size(); ++k) {
      if (!exiting_set.count(rec.pending[k].first)) {
        pending.push_back(rec.pending[k]);
        cams.push_back(rec.pending_camera[k]);
      }
    }
    rec.pending = std::move(pending);
    rec.pending_camera = std::move(cams);
  }
}

Trajectory FixedLagSmoother::trajectory() const {
  std::vector<TimedPose> samples;
  samples.reserve(finished_.size() + window_.size());
  for (const auto& [id, tp] : finished_) samples.push_back(tp);
  for (const auto& [id, t] : window_) samples.push_back({t, values_.poses.at(id)});
  std::sort(samples.begin(), samples.end(),
            [](const TimedPose& a, const TimedPose& b) { return a.timestamp < b.timestamp; });
  return Trajectory(std::move(samples));
}

}  // namespace vantage::backend
