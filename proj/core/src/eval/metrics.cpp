// SPDX-License-Identifier: Apache-2.0

#include "vantage/eval/metrics.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace vantage::eval {

std::vector<std::pair<size_t, size_t>> associate(const Trajectory& est, const Trajectory& ref,
                                                 double max_time_offset_s) {
  std::vector<std::pair<size_t, size_t>> pairs;
  size_t r = 0;
  for (size_t e = 0; e < est.size(); ++e) {
    const double t = est[e].timestamp;
    while (r + 1 < ref.size() &&
           std::abs(ref[r + 1].timestamp - t) <= std::abs(ref[r].timestamp - t)) {
      ++r;
    }
    if (r < ref.size() && std::abs(ref[r].timestamp - t) <= max_time_offset_s) {
      pairs.emplace_back(e, r);
    }
  }
  return pairs;
}

AlignmentResult align_trajectories(const Trajectory& est, const Trajectory& ref,
                                   double max_time_offset_s) {
  const auto pairs = associate(est, ref, max_time_offset_s);
  if (pairs.size() < 3) {
    throw AssociationError("align_trajectories: fewer than 3 associated pose pairs");
  }

  Vector3d centroid_est = Vector3d::Zero();
  Vector3d centroid_ref = Vector3d::Zero();
  for (const auto& [e, r] : pairs) {
    centroid_est += est[e].pose.translation();
    centroid_ref += ref[r].pose.translation();
  }
  centroid_est /= static_cast<double>(pairs.size());
  centroid_ref /= static_cast<double>(pairs.size());

  Matrix3d w = Matrix3d::Zero();
  for (const auto& [e, r] : pairs) {
    w += (ref[r].pose.translation() - centroid_ref) *
         (est[e].pose.translation() - centroid_est).transpose();
  }
  const Eigen::JacobiSVD<Matrix3d> svd(w, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vector3d s(1, 1, (svd.matrixU() * svd.matrixV().transpose()).determinant());
  const Matrix3d rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  const Vector3d translation = centroid_ref - rotation * centroid_est;
  const Pose g(Rotation(rotation), translation);

  std::vector<TimedPose> aligned;
  aligned.reserve(est.size());
  for (const TimedPose& tp : est.samples()) aligned.push_back({tp.timestamp, g * tp.pose});
  return {Trajectory(std::move(aligned)), g};
}

double ate_rmse(const Trajectory& aligned_est, const Trajectory& ref, double max_time_offset_s) {
  const auto pairs = associate(aligned_est, ref, max_time_offset_s);
  if (pairs.empty()) throw AssociationError("ate_rmse: no associated pose pairs");
  double sum_sq = 0.0;
  for (const auto& [e, r] : pairs) {
    sum_sq += (aligned_est[e].pose.translation() - ref[r].pose.translation()).squaredNorm();
  }
  return std::sqrt(sum_sq / static_cast<double>(pairs.size()));
}

double drift_percent(double rmse_m, double length_m) {
  if (length_m <= 0) throw std::invalid_argument("drift_percent: length must be > 0");
  if (rmse_m < 0) throw std::invalid_argument("drift_percent: rmse must be >= 0");
  const double drift = 100.0 * rmse_m / length_m;
  return std::nearbyint(drift * 10.0) / 10.0;  // one decimal, ties to even
}

Histogram Histogram::bin(const std::vector<double>& samples, double bin_width, double max_value) {
  if (bin_width <= 0 || max_value <= 0) {
    throw std::invalid_argument("Histogram::bin: width and max must be > 0");
  }
  Histogram h;
  h.bin_width = bin_width;
  h.max_value = max_value;
  const int regular = static_cast<int>(std::llround(max_value / bin_width));
  h.counts.assign(regular + 1, 0);
  for (double s : samples) {
    if (s < 0) s = 0;
    const int idx = static_cast<int>(s / bin_width);
    h.counts[std::min(idx, regular)] += 1;
  }
  return h;
}

}  // namespace vantage::eval
