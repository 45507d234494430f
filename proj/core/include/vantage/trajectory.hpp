// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <vector>

#include "vantage/geometry.hpp"

namespace vantage {

struct TimedPose {
  double timestamp = 0.0;
  Pose pose;
};

/// Time-ordered poses. Timestamps are strictly increasing.
class Trajectory {
 public:
  Trajectory() = default;
  explicit Trajectory(std::vector<TimedPose> samples) : samples_(std::move(samples)) {
    for (size_t i = 1; i < samples_.size(); ++i) {
      if (samples_[i].timestamp <= samples_[i - 1].timestamp) {
        throw std::invalid_argument("Trajectory: timestamps must be strictly increasing");
      }
    }
  }

  const std::vector<TimedPose>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  size_t size() const { return samples_.size(); }
  const TimedPose& operator[](size_t i) const { return samples_[i]; }
  const TimedPose& front() const { return samples_.front(); }
  const TimedPose& back() const { return samples_.back(); }

  void push_back(const TimedPose& tp) {
    if (!samples_.empty() && tp.timestamp <= samples_.back().timestamp) {
      throw std::invalid_argument("Trajectory: timestamps must be strictly increasing");
    }
    samples_.push_back(tp);
  }

  /// Pose at time t, interpolating between the bracketing samples.
  /// t must lie within [front, back].
  Pose at(double t) const;

  /// Sum of consecutive translation distances, meters.
  double path_length() const;

 private:
  std::vector<TimedPose> samples_;
};

}  // namespace vantage
