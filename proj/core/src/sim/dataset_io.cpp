// SPDX-License-Identifier: Apache-2.0

#include "vantage/sim/dataset_io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vantage/io/format.hpp"
#include "vantage/io/tum.hpp"

namespace vantage::sim {

namespace fs = std::filesystem;
using io::g9;
using io::IoError;

void save_dataset(const Dataset& ds, const std::string& directory) {
  fs::create_directories(directory);
  const fs::path dir(directory);

  save_scenario(ds.config, (dir / "scenario.json").string());
  io::save_tum(ds.ground_truth, (dir / "groundtruth.tum").string());

  for (size_t cam = 0; cam < ds.tracks.size(); ++cam) {
    std::ofstream out(dir / ("tracks_cam" + std::to_string(cam) + ".csv"));
    if (!out) throw IoError("cannot write tracks file");
    out << "track_id,timestamp,u,v,is_outlier\n";
    for (const TrackObservation& o : ds.tracks[cam]) {
      out << o.track_id << ',' << g9(o.timestamp) << ',' << g9(o.pixel.x()) << ','
          << g9(o.pixel.y()) << ',' << (o.is_outlier ? 1 : 0) << '\n';
    }
  }

  {
    std::ofstream out(dir / "odometry.csv");
    if (!out) throw IoError("cannot write odometry file");
    out << "t0,t1,dx,dy,dz,qx,qy,qz,qw\n";
    for (const OdometryIncrement& inc : ds.odometry) {
      const auto& t = inc.delta.translation();
      const auto& q = inc.delta.rotation().quaternion();
      out << g9(inc.t0) << ',' << g9(inc.t1) << ',' << g9(t.x()) << ',' << g9(t.y()) << ','
          << g9(t.z()) << ',' << g9(q.x()) << ',' << g9(q.y()) << ',' << g9(q.z()) << ','
          << g9(q.w()) << '\n';
    }
  }

  {
    std::ofstream out(dir / "groundpoints.csv");
    if (!out) throw IoError("cannot write groundpoints file");
    out << "timestamp,cam,x,y,z\n";
    for (const GroundPointObservation& g : ds.ground_points) {
      out << g9(g.timestamp) << ',' << g.camera_id << ',' << g9(g.point_world.x()) << ','
          << g9(g.point_world.y()) << ',' << g9(g.point_world.z()) << '\n';
    }
  }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

}  // namespace

Dataset load_dataset(const std::string& directory) {
  const fs::path dir(directory);
  Dataset ds;
  ds.config = load_scenario((dir / "scenario.json").string());
  ds.ground_truth = io::load_tum((dir / "groundtruth.tum").string());
  ds.rig = default_camera_rig();

  const auto frames =
      static_cast<std::int64_t>(std::llround(ds.config.duration_s * ds.config.camera_rate_hz));
  for (std::int64_t f = 0; f <= frames; ++f) {
    ds.frame_timestamps.push_back(static_cast<double>(f) / ds.config.camera_rate_hz);
  }

  ds.tracks.resize(ds.rig.size());
  for (size_t cam = 0; cam < ds.rig.size(); ++cam) {
    std::ifstream in(dir / ("tracks_cam" + std::to_string(cam) + ".csv"));
    if (!in) throw IoError("cannot open tracks file for camera " + std::to_string(cam));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 5) throw IoError("malformed tracks row: " + line);
      TrackObservation o;
      o.track_id = std::stoll(f[0]);
      o.timestamp = std::stod(f[1]);
      o.pixel = Vector2d(std::stod(f[2]), std::stod(f[3]));
      o.is_outlier = f[4] == "1";
      ds.tracks[cam].push_back(o);
    }
  }

  {
    std::ifstream in(dir / "odometry.csv");
    if (!in) throw IoError("cannot open odometry.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 9) throw IoError("malformed odometry row: " + line);
      OdometryIncrement inc;
      inc.t0 = std::stod(f[0]);
      inc.t1 = std::stod(f[1]);
      inc.delta = Pose(
          Rotation(Eigen::Quaterniond(std::stod(f[8]), std::stod(f[5]), std::stod(f[6]),
                                      std::stod(f[7]))),
          Vector3d(std::stod(f[2]), std::stod(f[3]), std::stod(f[4])));
      ds.odometry.push_back(inc);
    }
  }

  {
    std::ifstream in(dir / "groundpoints.csv");
    if (!in) throw IoError("cannot open groundpoints.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() != 5) throw IoError("malformed groundpoints row: " + line);
      ds.ground_points.push_back({std::stod(f[0]), std::stoi(f[1]),
                                  Vector3d(std::stod(f[2]), std::stod(f[3]), std::stod(f[4]))});
    }
  }

  return ds;
}

}  // namespace vantage::sim
