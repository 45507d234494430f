// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vantage::sim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class TrajectoryShape { kLoop, kFigureEight, kStraight, kRampLoop };

TrajectoryShape shape_from_string(const std::string& name);
std::string to_string(TrajectoryShape shape);

/// Time interval during which one camera produces no observations.
struct OcclusionWindow {
  int camera_id = 0;
  double begin_s = 0.0;
  double end_s = 0.0;
};

/// Everything the synthetic-world generator needs. All randomness in the
/// generated dataset derives from `seed` alone.
struct ScenarioConfig {
  TrajectoryShape shape = TrajectoryShape::kLoop;
  double duration_s = 60.0;
  double camera_rate_hz = 20.0;
  double odometry_rate_hz = 100.0;

  double pixel_noise_sigma_px = 1.0;
  double track_outlier_rate = 0.02;
  double odometry_sigma_rot_rad = 0.001;  // per odometry step
  double odometry_sigma_trans_m = 0.005;  // per odometry step

  int landmark_count = 2000;
  std::vector<OcclusionWindow> occlusions;
  double pr_false_positive_rate = 0.0;
  std::uint64_t seed = 0;

  // Shape parameters.
  double radius_m = 30.0;      // loop / figure-eight / ramp-loop extent
  double speed_mps = 5.0;      // straight-line speed
  double ramp_height_m = 6.0;  // peak height of the ramp-loop helix

  int ground_points_per_frame = 40;

  void validate() const;
};

ScenarioConfig scenario_from_json_string(const std::string& text);
std::string scenario_to_json_string(const ScenarioConfig& config);
ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& config, const std::string& path);

}  // namespace vantage::sim
