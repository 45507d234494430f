// SPDX-License-Identifier: Apache-2.0

#include "vantage/trajectory.hpp"

#include <algorithm>

namespace vantage {

Pose Trajectory::at(double t) const {
  if (samples_.empty()) throw std::invalid_argument("Trajectory::at: empty trajectory");
  constexpr double kSlack = 1e-9;
  if (t <= samples_.front().timestamp + kSlack && t >= samples_.front().timestamp - kSlack) {
    return samples_.front().pose;
  }
  if (t < samples_.front().timestamp || t > samples_.back().timestamp + kSlack) {
    throw std::invalid_argument("Trajectory::at: time outside trajectory span");
  }
  const auto it = std::lower_bound(
      samples_.begin(), samples_.end(), t,
      [](const TimedPose& s, double value) { return s.timestamp < value; });
  if (it == samples_.end()) return samples_.back().pose;
  if (it->timestamp == t || it == samples_.begin()) return it->pose;
  const TimedPose& hi = *it;
  const TimedPose& lo = *(it - 1);
  const double alpha = (t - lo.timestamp) / (hi.timestamp - lo.timestamp);
  return interpolate(lo.pose, hi.pose, alpha);
}

double Trajectory::path_length() const {
  double length = 0.0;
  for (size_t i = 1; i < samples_.size(); ++i) {
    length += (samples_[i].pose.translation() - samples_[i - 1].pose.translation()).norm();
  }
  return length;
}

}  // namespace vantage
