// SPDX-License-Identifier: Apache-2.0

#include "vantage/mapping/mesh.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "mc_tables.hpp"
#include "vantage/io/format.hpp"

namespace vantage::mapping {

namespace {

// Bourke corner offsets within one cell.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
// Cell edges as corner pairs.
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

Vector3d interpolate_crossing(const Vector3d& p1, const Vector3d& p2, double v1, double v2) {
  if (std::abs(v1 - v2) < 1e-15) return p1;
  const double alpha = v1 / (v1 - v2);
  return p1 + alpha * (p2 - p1);
}

double triangle_area(const Vector3d& a, const Vector3d& b, const Vector3d& c) {
  return 0.5 * (b - a).cross(c - a).norm();
}

}  // namespace

Mesh extract_mesh(const TsdfGrid& grid) {
  Mesh mesh;
  for (const auto& [anchor, voxel] : grid.voxels()) {
    double values[8];
    Vector3d positions[8];
    bool complete = true;
    for (int c = 0; c < 8 && complete; ++c) {
      const VoxelIndex idx{anchor.x + kCorner[c][0], anchor.y + kCorner[c][1],
                           anchor.z + kCorner[c][2]};
      const Voxel* v = grid.find(idx);
      if (!v || v->weight <= 0.0) {
        complete = false;
        break;
      }
      values[c] = v->tsdf;
      positions[c] = grid.center_of(idx);
    }
    if (!complete) continue;

    int cube_index = 0;
    for (int c = 0; c < 8; ++c) {
      if (values[c] < 0.0) cube_index |= 1 << c;
    }
    if (kEdgeTable[cube_index] == 0) continue;

    Vector3d edge_vertex[12];
    for (int e = 0; e < 12; ++e) {
      if (kEdgeTable[cube_index] & (1 << e)) {
        edge_vertex[e] = interpolate_crossing(positions[kEdge[e][0]], positions[kEdge[e][1]],
                                              values[kEdge[e][0]], values[kEdge[e][1]]);
      }
    }

    for (const int* t = kTriTable[cube_index]; *t != -1; t += 3) {
      const Vector3d& a = edge_vertex[t[0]];
      const Vector3d& b = edge_vertex[t[1]];
      const Vector3d& c = edge_vertex[t[2]];
      if (triangle_area(a, b, c) < 1e-12) continue;
      const int base = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back(a);
      mesh.vertices.push_back(b);
      mesh.vertices.push_back(c);
      mesh.triangles.push_back({base, base + 1, base + 2});
    }
  }
  return mesh;
}

void save_obj(const Mesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write mesh file: " + path);
  for (const Vector3d& v : mesh.vertices) {
    out << "v " << io::g9(v.x()) << ' ' << io::g9(v.y()) << ' ' << io::g9(v.z()) << '\n';
  }
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  }
}

void save_free_space_csv(const std::vector<Vector3d>& centers, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io::IoError("cannot write free-space file: " + path);
  out << "x,y,z\n";
  for (const Vector3d& c : centers) {
    out << io::g9(c.x()) << ',' << io::g9(c.y()) << ',' << io::g9(c.z()) << '\n';
  }
}

double GroundTruthSurface::distance(const Vector3d& p) const {
  if (is_plane_) return std::abs(p.z() - plane_z_);
  double best = std::numeric_limits<double>::infinity();
  for (const Vector3d& q : points_) best = std::min(best, (p - q).norm());
  return best;
}

double reconstruction_error(const Mesh& mesh, const GroundTruthSurface& surface) {
  if (mesh.vertices.empty()) {
    throw std::invalid_argument("reconstruction_error: undefined for an empty mesh");
  }
  double sum_sq = 0.0;
  for (const Vector3d& v : mesh.vertices) {
    const double d = surface.distance(v);
    sum_sq += d * d;
  }
  return std::sqrt(sum_sq / mesh.vertices.size());
}

}  // namespace vantage::mapping
