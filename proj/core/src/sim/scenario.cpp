// SPDX-License-Identifier: Apache-2.0

#include "vantage/sim/scenario.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace vantage::sim {

using nlohmann::ordered_json;

TrajectoryShape shape_from_string(const std::string& name) {
  if (name == "loop") return TrajectoryShape::kLoop;
  if (name == "figure-eight") return TrajectoryShape::kFigureEight;
  if (name == "straight") return TrajectoryShape::kStraight;
  if (name == "ramp-loop") return TrajectoryShape::kRampLoop;
  throw ConfigError("unknown trajectory shape: " + name);
}

std::string to_string(TrajectoryShape shape) {
  switch (shape) {
    case TrajectoryShape::kLoop: return "loop";
    case TrajectoryShape::kFigureEight: return "figure-eight";
    case TrajectoryShape::kStraight: return "straight";
    case TrajectoryShape::kRampLoop: return "ramp-loop";
  }
  throw ConfigError("invalid trajectory shape enum");
}

void ScenarioConfig::validate() const {
  if (duration_s <= 0) throw ConfigError("duration_s must be > 0");
  if (camera_rate_hz <= 0 || odometry_rate_hz <= 0) throw ConfigError("rates must be > 0");
  if (camera_rate_hz > odometry_rate_hz) {
    throw ConfigError("camera rate must not exceed odometry rate");
  }
  if (track_outlier_rate < 0 || track_outlier_rate > 1) {
    throw ConfigError("track_outlier_rate must be in [0, 1]");
  }
  if (pr_false_positive_rate < 0 || pr_false_positive_rate > 1) {
    throw ConfigError("pr_false_positive_rate must be in [0, 1]");
  }
  if (pixel_noise_sigma_px < 0) throw ConfigError("pixel_noise_sigma_px must be >= 0");
  if (odometry_sigma_rot_rad < 0 || odometry_sigma_trans_m < 0) {
    throw ConfigError("odometry noise sigmas must be >= 0");
  }
  if (landmark_count < 0) throw ConfigError("landmark_count must be >= 0");
  if (radius_m <= 0) throw ConfigError("radius_m must be > 0");
  if (speed_mps <= 0) throw ConfigError("speed_mps must be > 0");
  for (const auto& w : occlusions) {
    if (w.camera_id < 0 || w.camera_id > 3) throw ConfigError("occlusion camera_id out of range");
    if (w.end_s < w.begin_s) throw ConfigError("occlusion window must have end >= begin");
  }
}

ScenarioConfig scenario_from_json_string(const std::string& text) {
  const auto j = ordered_json::parse(text);
  ScenarioConfig c;
  c.shape = shape_from_string(j.value("shape", std::string("loop")));
  c.duration_s = j.value("duration_s", c.duration_s);
  c.camera_rate_hz = j.value("camera_rate_hz", c.camera_rate_hz);
  c.odometry_rate_hz = j.value("odometry_rate_hz", c.odometry_rate_hz);
  c.pixel_noise_sigma_px = j.value("pixel_noise_sigma_px", c.pixel_noise_sigma_px);
  c.track_outlier_rate = j.value("track_outlier_rate", c.track_outlier_rate);
  c.odometry_sigma_rot_rad = j.value("odometry_sigma_rot_rad", c.odometry_sigma_rot_rad);
  c.odometry_sigma_trans_m = j.value("odometry_sigma_trans_m", c.odometry_sigma_trans_m);
  c.landmark_count = j.value("landmark_count", c.landmark_count);
  c.pr_false_positive_rate = j.value("pr_false_positive_rate", c.pr_false_positive_rate);
  c.seed = j.value("seed", c.seed);
  c.radius_m = j.value("radius_m", c.radius_m);
  c.speed_mps = j.value("speed_mps", c.speed_mps);
  c.ramp_height_m = j.value("ramp_height_m", c.ramp_height_m);
  c.ground_points_per_frame = j.value("ground_points_per_frame", c.ground_points_per_frame);
  if (j.contains("occlusions")) {
    for (const auto& w : j.at("occlusions")) {
      c.occlusions.push_back({w.at("camera").get<int>(), w.at("begin_s").get<double>(),
                              w.at("end_s").get<double>()});
    }
  }
  c.validate();
  return c;
}

std::string scenario_to_json_string(const ScenarioConfig& c) {
  ordered_json j;
  j["shape"] = to_string(c.shape);
  j["duration_s"] = c.duration_s;
  j["camera_rate_hz"] = c.camera_rate_hz;
  j["odometry_rate_hz"] = c.odometry_rate_hz;
  j["pixel_noise_sigma_px"] = c.pixel_noise_sigma_px;
  j["track_outlier_rate"] = c.track_outlier_rate;
  j["odometry_sigma_rot_rad"] = c.odometry_sigma_rot_rad;
  j["odometry_sigma_trans_m"] = c.odometry_sigma_trans_m;
  j["landmark_count"] = c.landmark_count;
  j["pr_false_positive_rate"] = c.pr_false_positive_rate;
  j["seed"] = c.seed;
  j["radius_m"] = c.radius_m;
  j["speed_mps"] = c.speed_mps;
  j["ramp_height_m"] = c.ramp_height_m;
  j["ground_points_per_frame"] = c.ground_points_per_frame;
  j["occlusions"] = ordered_json::array();
  for (const auto& w : c.occlusions) {
    j["occlusions"].push_back({{"camera", w.camera_id}, {"begin_s", w.begin_s}, {"end_s", w.end_s}});
  }
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scenario_from_json_string(ss.str());
}

void save_scenario(const ScenarioConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json_string(config);
}

}  // namespace vantage::sim
