// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "vantage/trajectory.hpp"

namespace vantage::io {

/// TUM trajectory format: one `timestamp tx ty tz qx qy qz qw` record per
/// line, space separated.
void save_tum(const Trajectory& traj, const std::string& path);
Trajectory load_tum(const std::string& path);

}  // namespace vantage::io
