// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <stdexcept>

#include "vantage/backend/factors.hpp"
#include "vantage/sim/simulator.hpp"

namespace vantage::backend {

class CoverageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-step odometry noise, decoupled tangent, one standard deviation.
struct OdometryNoise {
  double sigma_rot_rad = 0.001;
  double sigma_trans_m = 0.005;
};

/// Composes the odometry increments covering [t0, t1] into one relative-pose
/// measurement. Increments straddling an endpoint contribute a fractional
/// part obtained by geodesic interpolation; the information matrix is the
/// inverse of the first-order-propagated per-step covariance.
///
/// Throws std::invalid_argument when t0 >= t1 and CoverageError when the log
/// has a gap of more than two sample periods inside [t0, t1].
RelativePoseMeasurement chain_increments(std::span<const sim::OdometryIncrement> log, double t0,
                                         double t1, const OdometryNoise& noise = {});

}  // namespace vantage::backend
