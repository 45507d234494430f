// SPDX-License-Identifier: Apache-2.0
//
// Per-camera track management: keyframe selection and RANSAC-based outlier
// rejection against the previous keyframe. One instance per camera; instances
// share no state and may run concurrently.

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "vantage/camera.hpp"
#include "vantage/frontend/two_view.hpp"

namespace vantage::frontend {

using KeyframeId = std::int64_t;
using TrackId = std::int64_t;

struct TrackStats {
  int track_count = 0;
  double mean_track_length = 0.0;
};

struct KeyframePolicy {
  double fraction_threshold = 0.7;  // keyframe when tracked fraction drops below
  int min_track_count = 20;
  double max_interval_s = 0.5;
  double min_interval_s = 0.0;
};

/// Pure keyframe-trigger rule: keyframe when the surviving track count drops
/// below fraction_threshold of the count at the last keyframe, below
/// min_track_count absolute, or when max_interval_s has elapsed.
bool select_keyframe(const TrackStats& now, const TrackStats& at_last_keyframe, double elapsed_s,
                     const KeyframePolicy& policy = {});

struct TrackPixel {
  TrackId track_id = 0;
  Vector2d pixel = Vector2d::Zero();
};

struct FrontendOutput {
  KeyframeId keyframe_id = 0;
  int camera_id = 0;
  double timestamp = 0.0;
  std::vector<TrackPixel> inlier_tracks;
  TrackStats stats;
};

struct FrontendParams {
  KeyframePolicy keyframes;
  RansacParams ransac;
  int max_tracks_per_frame = 120;  // lowest track ids win, 0 = unlimited
};

/// Track bookkeeping for one camera. Feed every frame through observe();
/// the caller decides when a keyframe fires (typically when any camera in
/// the rig votes yes) and then calls emit_keyframe() on all cameras.
class CameraFrontend {
 public:
  CameraFrontend(int camera_id, const CameraModel& cam, const FrontendParams& params = {})
      : camera_id_(camera_id), cam_(cam), params_(params) {}

  /// Registers the observations of one frame.
  void observe(double timestamp, std::vector<TrackPixel> observations);

  /// Stats of the most recent frame relative to the last keyframe.
  TrackStats current_stats() const;

  /// True when the most recent frame should become a keyframe.
  bool votes_keyframe() const;

  /// Promotes the most recent frame to a keyframe: 2D-2D RANSAC against the
  /// previous keyframe rejects outlier tracks; tracks with no previous
  /// keyframe observation pass through unchecked.
  FrontendOutput emit_keyframe(KeyframeId keyframe_id);

  int camera_id() const { return camera_id_; }
  const CameraModel& camera() const { return cam_; }

 private:
  int camera_id_;
  CameraModel cam_;
  FrontendParams params_;

  double current_time_ = 0.0;
  std::vector<TrackPixel> current_;
  bool has_frame_ = false;

  double last_keyframe_time_ = 0.0;
  std::map<TrackId, Vector2d> last_keyframe_tracks_;
  bool has_keyframe_ = false;

  std::map<TrackId, int> keyframe_appearances_;
};

}  // namespace vantage::frontend
