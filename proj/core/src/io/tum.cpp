// SPDX-License-Identifier: Apache-2.0

#include "vantage/io/tum.hpp"

#include <fstream>
#include <sstream>

#include "vantage/io/format.hpp"

namespace vantage::io {

void save_tum(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write trajectory file: " + path);
  for (const TimedPose& s : traj.samples()) {
    const auto& q = s.pose.rotation().quaternion();
    const auto& t = s.pose.translation();
    out << g9(s.timestamp) << ' ' << g9(t.x()) << ' ' << g9(t.y()) << ' ' << g9(t.z()) << ' '
        << g9(q.x()) << ' ' << g9(q.y()) << ' ' << g9(q.z()) << ' ' << g9(q.w()) << '\n';
  }
}

Trajectory load_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory file: " + path);
  std::vector<TimedPose> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double t, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> t >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
      throw IoError("malformed TUM record in " + path + ": " + line);
    }
    samples.push_back(
        {t, Pose(Rotation(Eigen::Quaterniond(qw, qx, qy, qz)), Vector3d(tx, ty, tz))});
  }
  return Trajectory(std::move(samples));
}

}  // namespace vantage::io
