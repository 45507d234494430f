// SPDX-License-Identifier: Apache-2.0

#include "vantage/rpgo/g2o_io.hpp"

#include <Eigen/Eigenvalues>
#include <fstream>
#include <sstream>

#include "vantage/io/format.hpp"

namespace vantage::rpgo {

namespace {

// Permutation between this library's rotation-first block order and g2o's
// translation-first order.
Matrix6d block_swap(const Matrix6d& m) {
  Matrix6d p = Matrix6d::Zero();
  p.block<3, 3>(0, 3).setIdentity();
  p.block<3, 3>(3, 0).setIdentity();
  return p * m * p.transpose();
}

backend::MeasurementKind classify_kind(backend::StateId i, backend::StateId j,
                                       const Matrix6d& information) {
  if (j == i + 1) return backend::MeasurementKind::kOdometry;
  const Matrix3d t_block = information.block<3, 3>(3, 3);
  if (t_block.norm() < 1e-12) return backend::MeasurementKind::kLoopRotationOnly;
  const Eigen::SelfAdjointEigenSolver<Matrix3d> eig(t_block);
  const Vector3d ev = eig.eigenvalues();
  if (std::abs(ev(0)) < 1e-9 && std::abs(ev(1) - 1.0) < 1e-9 && std::abs(ev(2) - 1.0) < 1e-9) {
    return backend::MeasurementKind::kLoopScaleless;
  }
  return backend::MeasurementKind::kLoopFull;
}

void write_edge(std::ofstream& out, const backend::RelativePoseMeasurement& e) {
  const auto& t = e.transform.translation();
  const auto& q = e.transform.rotation().quaternion();
  out << "EDGE_SE3:QUAT " << e.i << ' ' << e.j << ' ' << io::g9(t.x()) << ' ' << io::g9(t.y())
      << ' ' << io::g9(t.z()) << ' ' << io::g9(q.x()) << ' ' << io::g9(q.y()) << ' '
      << io::g9(q.z()) << ' ' << io::g9(q.w());
  const Matrix6d info = block_swap(e.information);
  for (int r = 0; r < 6; ++r) {
    for (int c = r; c < 6; ++c) out << ' ' << io::g9(info(r, c));
  }
  out << '\n';
}

}  // namespace

void save_g2o(const PoseGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write g2o file: " + path);
  for (const auto& [id, pose] : graph.nodes) {
    const auto& t = pose.translation();
    const auto& q = pose.rotation().quaternion();
    out << "VERTEX_SE3:QUAT " << id << ' ' << io::g9(t.x()) << ' ' << io::g9(t.y()) << ' '
        << io::g9(t.z()) << ' ' << io::g9(q.x()) << ' ' << io::g9(q.y()) << ' ' << io::g9(q.z())
        << ' ' << io::g9(q.w()) << '\n';
  }
  for (const auto& e : graph.odometry_edges) write_edge(out, e);
  for (const auto& e : graph.loop_edges) write_edge(out, e);
}

PoseGraph load_g2o(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io::IoError("cannot open g2o file: " + path);

  PoseGraph graph;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "VERTEX_SE3:QUAT") {
      backend::StateId id;
      double tx, ty, tz, qx, qy, qz, qw;
      if (!(ss >> id >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
        throw io::IoError("malformed vertex: " + line);
      }
      graph.nodes[id] =
          Pose(Rotation(Eigen::Quaterniond(qw, qx, qy, qz)), Vector3d(tx, ty, tz));
    } else if (tag == "EDGE_SE3:QUAT") {
      backend::StateId i, j;
      double tx, ty, tz, qx, qy, qz, qw;
      if (!(ss >> i >> j >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) {
        throw io::IoError("malformed edge: " + line);
      }
      Matrix6d info = Matrix6d::Zero();
      for (int r = 0; r < 6; ++r) {
        for (int c = r; c < 6; ++c) {
          double v;
          if (!(ss >> v)) throw io::IoError("malformed edge information: " + line);
          info(r, c) = v;
          info(c, r) = v;
        }
      }
      backend::RelativePoseMeasurement e;
      e.i = i;
      e.j = j;
      e.transform = Pose(Rotation(Eigen::Quaterniond(qw, qx, qy, qz)), Vector3d(tx, ty, tz));
      e.information = block_swap(info);
      e.kind = classify_kind(i, j, e.information);
      if (e.kind == backend::MeasurementKind::kOdometry) {
        graph.odometry_edges.push_back(e);
      } else {
        graph.loop_edges.push_back(e);
      }
    }
  }
  if (graph.nodes.empty()) throw io::IoError("g2o file has no vertices: " + path);
  return graph;
}

}  // namespace vantage::rpgo
