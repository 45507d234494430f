// SPDX-License-Identifier: Apache-2.0

#include "vantage/rpgo/rpgo.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vantage::rpgo {

namespace {

// chi-square 0.99 quantiles.
constexpr double kChi2Dof3 = 11.344866730144373;
constexpr double kChi2Dof5 = 15.086272469388987;
constexpr double kChi2Dof6 = 16.811893829770927;

}  // namespace

void PoseGraph::anchor_first_node() {
  if (nodes.empty()) throw std::invalid_argument("PoseGraph: no nodes to anchor");
  backend::PriorFactor prior;
  prior.state = nodes.begin()->first;
  prior.mean = nodes.begin()->second;
  prior.information = Matrix6d::Identity() * 1e8;
  priors.push_back(prior);
}

void PoseGraph::validate() const {
  if (nodes.empty()) throw std::invalid_argument("PoseGraph: empty graph");
  // Union-find over odometry edges: they must form a connected chain.
  std::map<backend::StateId, backend::StateId> parent;
  for (const auto& [id, pose] : nodes) parent[id] = id;
  const auto find = [&](backend::StateId s) {
    while (parent[s] != s) {
      parent[s] = parent[parent[s]];
      s = parent[s];
    }
    return s;
  };
  for (const auto& e : odometry_edges) {
    if (!nodes.count(e.i) || !nodes.count(e.j)) {
      throw std::invalid_argument("PoseGraph: edge references a missing node");
    }
    parent[find(e.i)] = find(e.j);
  }
  for (const auto& e : loop_edges) {
    if (!nodes.count(e.i) || !nodes.count(e.j)) {
      throw std::invalid_argument("PoseGraph: loop edge references a missing node");
    }
  }
  const backend::StateId root = find(nodes.begin()->first);
  for (const auto& [id, pose] : nodes) {
    if (find(id) != root) {
      throw std::invalid_argument("PoseGraph: odometry edges do not connect all nodes");
    }
  }
}

double edge_cbar_sq(const backend::RelativePoseMeasurement& edge) {
  switch (edge.kind) {
    case backend::MeasurementKind::kLoopScaleless: return kChi2Dof5;
    case backend::MeasurementKind::kLoopRotationOnly: return kChi2Dof3;
    default: return kChi2Dof6;
  }
}

double gnc_weight_update(double weighted_residual_sq, double mu, double cbar_sq) {
  if (mu <= 0) throw std::invalid_argument("gnc_weight_update: mu must be > 0");
  const double r2 = weighted_residual_sq;
  if (r2 <= mu / (mu + 1.0) * cbar_sq) return 1.0;
  if (r2 >= (mu + 1.0) / mu * cbar_sq) return 0.0;
  const double w = std::sqrt(cbar_sq * mu * (mu + 1.0) / r2) - mu;
  return std::clamp(w, 0.0, 1.0);
}

PgoResult pgo_optimize(const PoseGraph& graph, bool robust, const GncParams& params,
                       const backend::LmOptions& lm_in) {
  graph.validate();
  if (graph.priors.empty()) {
    throw std::invalid_argument("pgo_optimize: graph needs a gauge prior");
  }

  backend::LmOptions lm = lm_in;
  lm.huber_on_projection = false;

  std::vector<backend::Factor> factors;
  for (const auto& p : graph.priors) factors.emplace_back(p);
  for (const auto& e : graph.odometry_edges) factors.emplace_back(backend::RelativePoseFactor{e});
  const size_t loop_offset = factors.size();
  for (const auto& e : graph.loop_edges) factors.emplace_back(backend::RelativePoseFactor{e});

  backend::Values values;
  values.poses = graph.nodes;

  std::vector<double> weights(factors.size(), 1.0);
  backend::OptimizeResult opt = backend::optimize(factors, values, lm, &weights);

  PgoResult result;
  result.loop_edge_weights.assign(graph.loop_edges.size(), 1.0);

  const auto loop_residual_scaled = [&](size_t k) {
    const auto& e = graph.loop_edges[k];
    const double r2 =
        backend::relative_pose_factor_value(e, values.poses.at(e.i), values.poses.at(e.j));
    const double cbar = params.cbar_sq_override > 0 ? params.cbar_sq_override : edge_cbar_sq(e);
    return r2 / cbar;
  };

  if (robust && !graph.loop_edges.empty()) {
    double s_max = 0.0;
    for (size_t k = 0; k < graph.loop_edges.size(); ++k) {
      s_max = std::max(s_max, loop_residual_scaled(k));
    }
    if (s_max > 1.0) {
      // TLS annealing: mu starts near the convex surrogate and grows until
      // the weights are effectively binary.
      double mu = 1.0 / (2.0 * s_max - 1.0);
      for (int outer = 0; outer < params.max_outer_iterations; ++outer) {
        result.outer_iterations = outer + 1;
        for (size_t k = 0; k < graph.loop_edges.size(); ++k) {
          result.loop_edge_weights[k] = gnc_weight_update(loop_residual_scaled(k), mu, 1.0);
          weights[loop_offset + k] = result.loop_edge_weights[k];
        }
        opt = backend::optimize(factors, values, lm, &weights);

        bool binary = true;
        for (size_t k = 0; k < graph.loop_edges.size(); ++k) {
          const double w = gnc_weight_update(loop_residual_scaled(k), mu, 1.0);
          if (w > params.weight_convergence_eps && w < 1.0 - params.weight_convergence_eps) {
            binary = false;
          }
        }
        if (binary) {
          for (size_t k = 0; k < graph.loop_edges.size(); ++k) {
            result.loop_edge_weights[k] = gnc_weight_update(loop_residual_scaled(k), mu, 1.0);
            weights[loop_offset + k] = result.loop_edge_weights[k];
          }
          opt = backend::optimize(factors, values, lm, &weights);
          break;
        }
        mu *= params.mu_multiplier;
      }
    }
  }

  result.poses = values.poses;
  result.final_cost = opt.final_cost;
  return result;
}

Trajectory pgo_trajectory(const PgoResult& result,
                          const std::map<backend::StateId, double>& timestamps) {
  std::vector<TimedPose> samples;
  samples.reserve(result.poses.size());
  for (const auto& [id, pose] : result.poses) {
    samples.push_back({timestamps.at(id), pose});
  }
  std::sort(samples.begin(), samples.end(),
            [](const TimedPose& a, const TimedPose& b) { return a.timestamp < b.timestamp; });
  return Trajectory(std::move(samples));
}

}  // namespace vantage::rpgo
