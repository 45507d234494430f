// SPDX-License-Identifier: Apache-2.0

#include "vantage/mapping/tsdf.hpp"

#include <algorithm>
#include <cmath>

namespace vantage::mapping {

void TsdfGrid::update_voxel(const VoxelIndex& v, double sdf) {
  const double obs = std::clamp(sdf, -truncation_, truncation_);
  Voxel& voxel = voxels_[v];
  voxel.tsdf = (voxel.tsdf * voxel.weight + obs) / (voxel.weight + 1.0);
  voxel.weight += 1.0;
}

void TsdfGrid::integrate(const Vector3d& origin, std::span<const Vector3d> points) {
  for (const Vector3d& point : points) {
    if (!point.allFinite()) throw std::invalid_argument("TsdfGrid::integrate: non-finite point");
    const Vector3d delta = point - origin;
    const double depth = delta.norm();
    if (depth < 1e-9) continue;
    const Vector3d dir = delta / depth;
    const double t_end = depth + truncation_;

    // Amanatides-Woo voxel traversal from the origin to t_end along dir.
    VoxelIndex idx = index_of(origin);
    const VoxelIndex last = index_of(origin + t_end * dir);
    Eigen::Vector3i step;
    Vector3d t_max, t_delta;
    for (int a = 0; a < 3; ++a) {
      if (dir[a] > 1e-15) {
        step[a] = 1;
        const double boundary = (std::floor(origin[a] / voxel_size_) + 1.0) * voxel_size_;
        t_max[a] = (boundary - origin[a]) / dir[a];
        t_delta[a] = voxel_size_ / dir[a];
      } else if (dir[a] < -1e-15) {
        step[a] = -1;
        const double boundary = std::floor(origin[a] / voxel_size_) * voxel_size_;
        t_max[a] = (boundary - origin[a]) / dir[a];
        t_delta[a] = -voxel_size_ / dir[a];
      } else {
        step[a] = 0;
        t_max[a] = std::numeric_limits<double>::infinity();
        t_delta[a] = std::numeric_limits<double>::infinity();
      }
    }

    double t = 0.0;
    while (t <= t_end) {
      const double along = dir.dot(center_of(idx) - origin);
      const double sdf = depth - along;
      if (sdf >= -truncation_) update_voxel(idx, sdf);
      if (idx == last) break;
      int axis = 0;
      if (t_max[1] < t_max[axis]) axis = 1;
      if (t_max[2] < t_max[axis]) axis = 2;
      t = t_max[axis];
      t_max[axis] += t_delta[axis];
      idx = {idx.x + (axis == 0 ? step[0] : 0), idx.y + (axis == 1 ? step[1] : 0),
             idx.z + (axis == 2 ? step[2] : 0)};
    }
  }
}

std::vector<Vector3d> TsdfGrid::free_space_centers(double factor) const {
  std::vector<Vector3d> centers;
  for (const auto& [idx, voxel] : voxels_) {
    if (voxel.weight > 0 && voxel.tsdf >= factor * truncation_) {
      centers.push_back(center_of(idx));
    }
  }
  std::sort(centers.begin(), centers.end(), [](const Vector3d& a, const Vector3d& b) {
    return std::tie(a.x(), a.y(), a.z()) < std::tie(b.x(), b.y(), b.z());
  });
  return centers;
}

}  // namespace vantage::mapping
