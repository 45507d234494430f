// SPDX-License-Identifier: Apache-2.0

#include "vantage/frontend/frontend.hpp"

#include <algorithm>

namespace vantage::frontend {

bool select_keyframe(const TrackStats& now, const TrackStats& at_last_keyframe, double elapsed_s,
                     const KeyframePolicy& policy) {
  if (elapsed_s < policy.min_interval_s) return false;
  if (elapsed_s >= policy.max_interval_s) return true;
  if (now.track_count < policy.min_track_count) return true;
  return now.track_count <
         policy.fraction_threshold * static_cast<double>(at_last_keyframe.track_count);
}

void CameraFrontend::observe(double timestamp, std::vector<TrackPixel> observations) {
  std::sort(observations.begin(), observations.end(),
            [](const TrackPixel& a, const TrackPixel& b) { return a.track_id < b.track_id; });
  if (params_.max_tracks_per_frame > 0 &&
      static_cast<int>(observations.size()) > params_.max_tracks_per_frame) {
    observations.resize(params_.max_tracks_per_frame);
  }
  current_time_ = timestamp;
  current_ = std::move(observations);
  has_frame_ = true;
}

TrackStats CameraFrontend::current_stats() const {
  TrackStats stats;
  if (!has_keyframe_) {
    stats.track_count = static_cast<int>(current_.size());
    return stats;
  }
  double length_sum = 0.0;
  for (const TrackPixel& t : current_) {
    if (last_keyframe_tracks_.count(t.track_id)) ++stats.track_count;
    const auto it = keyframe_appearances_.find(t.track_id);
    length_sum += it == keyframe_appearances_.end() ? 1.0 : it->second + 1.0;
  }
  if (!current_.empty()) stats.mean_track_length = length_sum / current_.size();
  return stats;
}

bool CameraFrontend::votes_keyframe() const {
  if (!has_frame_) return false;
  if (!has_keyframe_) return true;
  TrackStats last;
  last.track_count = static_cast<int>(last_keyframe_tracks_.size());
  return select_keyframe(current_stats(), last, current_time_ - last_keyframe_time_,
                         params_.keyframes);
}

FrontendOutput CameraFrontend::emit_keyframe(KeyframeId keyframe_id) {
  FrontendOutput out;
  out.keyframe_id = keyframe_id;
  out.camera_id = camera_id_;
  out.timestamp = current_time_;
  out.stats = current_stats();

  // Correspondences against the previous keyframe. Only tracks that survive
  // the epipolar check are emitted; everything observed stays in the matching
  // state so it can be verified at the next keyframe.
  std::vector<std::pair<Vector2d, Vector2d>> correspondences;
  std::vector<TrackId> checked;
  for (const TrackPixel& t : current_) {
    const auto it = last_keyframe_tracks_.find(t.track_id);
    if (it != last_keyframe_tracks_.end()) {
      correspondences.emplace_back(it->second, t.pixel);
      checked.push_back(t.track_id);
    }
  }

  if (correspondences.size() >= 8) {
    const auto estimate = estimate_relative_pose_up_to_scale(correspondences, cam_, params_.ransac);
    if (estimate) {
      for (int idx : estimate->inlier_indices) {
        out.inlier_tracks.push_back({checked[idx], correspondences[idx].second});
      }
    }
    // No consensus at all: emit nothing, the odometry factor carries the epoch.
  }
  std::sort(out.inlier_tracks.begin(), out.inlier_tracks.end(),
            [](const TrackPixel& a, const TrackPixel& b) { return a.track_id < b.track_id; });

  last_keyframe_time_ = current_time_;
  last_keyframe_tracks_.clear();
  for (const TrackPixel& t : current_) last_keyframe_tracks_[t.track_id] = t.pixel;
  for (const TrackPixel& t : out.inlier_tracks) keyframe_appearances_[t.track_id] += 1;
  has_keyframe_ = true;
  return out;
}

}  // namespace vantage::frontend
