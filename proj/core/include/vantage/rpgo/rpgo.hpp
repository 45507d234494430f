// SPDX-License-Identifier: Apache-2.0
//
// Robust pose-graph optimization over the full trajectory: odometry edges
// plus loop-closure edges of any kind, solved with graduated non-convexity
// (TLS surrogate) to reject spurious loops.

#pragma once

#include <map>
#include <string>
#include <vector>

#include "vantage/backend/optimizer.hpp"
#include "vantage/trajectory.hpp"

namespace vantage::rpgo {

struct PoseGraph {
  std::map<backend::StateId, Pose> nodes;  // initial estimates
  std::vector<backend::RelativePoseMeasurement> odometry_edges;
  std::vector<backend::RelativePoseMeasurement> loop_edges;
  std::vector<backend::PriorFactor> priors;  // gauge; one on the first node

  /// Adds a gauge prior on the lowest node id at its initial estimate.
  void anchor_first_node();

  /// Odometry edges must connect every node into one chain.
  void validate() const;
};

struct GncParams {
  double mu_multiplier = 1.4;
  int max_outer_iterations = 100;
  double weight_convergence_eps = 1e-3;
  /// When > 0, overrides the per-edge chi-square 0.99 threshold on the
  /// weighted squared residual.
  double cbar_sq_override = 0.0;
};

/// chi-square 0.99 quantile for the edge's effective degrees of freedom
/// (6 full/odometry, 5 scale-less, 3 rotation-only).
double edge_cbar_sq(const backend::RelativePoseMeasurement& edge);

/// Closed-form TLS weight: 1 inside the inlier band, 0 beyond the outlier
/// band, c * sqrt(mu (mu+1)) / |r| - mu in between (clamped to [0, 1]).
double gnc_weight_update(double weighted_residual_sq, double mu, double cbar_sq);

struct PgoResult {
  std::map<backend::StateId, Pose> poses;
  std::vector<double> loop_edge_weights;  // aligned with graph.loop_edges
  double final_cost = 0.0;
  int outer_iterations = 0;
};

/// robust=false: one weighted LM solve over all edges. robust=true: GNC-TLS
/// outer loop; odometry edges always carry weight 1.
PgoResult pgo_optimize(const PoseGraph& graph, bool robust, const GncParams& params = {},
                       const backend::LmOptions& lm = {});

Trajectory pgo_trajectory(const PgoResult& result,
                          const std::map<backend::StateId, double>& timestamps);

}  // namespace vantage::rpgo
