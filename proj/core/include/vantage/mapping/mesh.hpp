// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <string>
#include <vector>

#include "vantage/mapping/tsdf.hpp"

namespace vantage::mapping {

struct Mesh {
  std::vector<Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
};

/// Marching cubes over the observed voxels with linear interpolation on the
/// zero crossing. Only cells whose eight corners all carry weight are meshed;
/// degenerate (zero-area) triangles are not emitted. An unobserved surface
/// yields an empty mesh.
Mesh extract_mesh(const TsdfGrid& grid);

/// Wavefront OBJ, vertices and triangular faces only.
void save_obj(const Mesh& mesh, const std::string& path);

/// Free-space voxel centers as x,y,z CSV rows.
void save_free_space_csv(const std::vector<Vector3d>& centers, const std::string& path);

/// Ground-truth geometry for reconstruction scoring: either an analytic
/// horizontal plane or a reference point set (nearest-neighbor distance).
class GroundTruthSurface {
 public:
  static GroundTruthSurface plane_z(double z) {
    GroundTruthSurface s;
    s.is_plane_ = true;
    s.plane_z_ = z;
    return s;
  }
  static GroundTruthSurface points(std::vector<Vector3d> pts) {
    GroundTruthSurface s;
    s.points_ = std::move(pts);
    return s;
  }

  double distance(const Vector3d& p) const;

 private:
  bool is_plane_ = false;
  double plane_z_ = 0.0;
  std::vector<Vector3d> points_;
};

/// RMSE of mesh-vertex distances to the nearest ground-truth surface point.
/// Throws std::invalid_argument on an empty mesh (the metric is undefined).
double reconstruction_error(const Mesh& mesh, const GroundTruthSurface& surface);

}  // namespace vantage::mapping
