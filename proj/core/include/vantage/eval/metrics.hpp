// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <vector>

#include "vantage/trajectory.hpp"

namespace vantage::eval {

class AssociationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Index pairs (est, ref) of nearest-timestamp matches within max_offset.
std::vector<std::pair<size_t, size_t>> associate(const Trajectory& est, const Trajectory& ref,
                                                 double max_time_offset_s);

struct AlignmentResult {
  Trajectory aligned_estimate;
  Pose transform;  // aligned = transform * est
};

/// Closed-form rigid SE(3) alignment (SVD of the centered cross-covariance,
/// no scale) after nearest-timestamp association. Throws AssociationError
/// with fewer than 3 associated pairs.
AlignmentResult align_trajectories(const Trajectory& est, const Trajectory& ref,
                                   double max_time_offset_s = 0.05);

/// Root-mean-square translation error over associated pairs.
double ate_rmse(const Trajectory& aligned_est, const Trajectory& ref,
                double max_time_offset_s = 0.05);

/// 100 * rmse / length, reported to one decimal (round half to even).
double drift_percent(double rmse_m, double length_m);

/// Fixed-width histogram with a final overflow bin, so counts always sum to
/// the number of samples.
struct Histogram {
  double bin_width = 1.0;
  double max_value = 20.0;
  std::vector<int> counts;  // size = max/width + 1 (overflow last)

  static Histogram bin(const std::vector<double>& samples, double bin_width, double max_value);
};

}  // namespace vantage::eval
