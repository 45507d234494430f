// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "vantage/sim/simulator.hpp"

namespace vantage::sim {

/// Writes one scenario directory: groundtruth.tum, tracks_cam{N}.csv,
/// odometry.csv, groundpoints.csv, scenario.json. Floating-point values
/// carry 9 significant digits.
void save_dataset(const Dataset& ds, const std::string& directory);

/// Reads a scenario directory written by save_dataset.
Dataset load_dataset(const std::string& directory);

}  // namespace vantage::sim
