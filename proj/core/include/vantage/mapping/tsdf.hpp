// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "vantage/geometry.hpp"

namespace vantage::mapping {

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;
  bool operator==(const VoxelIndex&) const = default;
};

struct VoxelIndexHash {
  size_t operator()(const VoxelIndex& v) const {
    // Large-prime spatial hash.
    return static_cast<size_t>(v.x) * 73856093u ^ static_cast<size_t>(v.y) * 19349663u ^
           static_cast<size_t>(v.z) * 83492791u;
  }
};

struct Voxel {
  double tsdf = 0.0;
  double weight = 0.0;
};

/// Sparse truncated signed-distance grid fused by ray casting. Voxels along
/// each origin-to-point ray receive free-space updates beyond the truncation
/// band and weighted-average signed-distance updates inside it.
class TsdfGrid {
 public:
  explicit TsdfGrid(double voxel_size_m = 0.2, double truncation_m = 0.4)
      : voxel_size_(voxel_size_m), truncation_(truncation_m) {
    if (voxel_size_m <= 0 || truncation_m <= 0) {
      throw std::invalid_argument("TsdfGrid: voxel size and truncation must be > 0");
    }
  }

  double voxel_size() const { return voxel_size_; }
  double truncation() const { return truncation_; }

  VoxelIndex index_of(const Vector3d& p) const {
    return {static_cast<int>(std::floor(p.x() / voxel_size_)),
            static_cast<int>(std::floor(p.y() / voxel_size_)),
            static_cast<int>(std::floor(p.z() / voxel_size_))};
  }
  Vector3d center_of(const VoxelIndex& v) const {
    return {(v.x + 0.5) * voxel_size_, (v.y + 0.5) * voxel_size_, (v.z + 0.5) * voxel_size_};
  }

  /// Integrates one point cloud observed from `origin`.
  void integrate(const Vector3d& origin, std::span<const Vector3d> points);

  /// Direct voxel write, for seeding analytic fields in tests.
  void set_voxel(const VoxelIndex& v, double tsdf, double weight) {
    voxels_[v] = {std::clamp(tsdf, -truncation_, truncation_), weight};
  }

  const Voxel* find(const VoxelIndex& v) const {
    const auto it = voxels_.find(v);
    return it == voxels_.end() ? nullptr : &it->second;
  }
  const std::unordered_map<VoxelIndex, Voxel, VoxelIndexHash>& voxels() const { return voxels_; }

  /// Centers of observed voxels whose tsdf marks them free (>= factor * tau).
  std::vector<Vector3d> free_space_centers(double factor = 0.9) const;

 private:
  void update_voxel(const VoxelIndex& v, double sdf);

  double voxel_size_;
  double truncation_;
  std::unordered_map<VoxelIndex, Voxel, VoxelIndexHash> voxels_;
};

}  // namespace vantage::mapping
