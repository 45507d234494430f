// SPDX-License-Identifier: Apache-2.0

#include "vantage/backend/marginalize.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <set>

namespace vantage::backend {

namespace {

bool touches_exiting(const Factor& factor, const std::set<StateId>& exiting) {
  return std::visit(
      [&](const auto& f) -> bool {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ProjectionFactor>) {
          return exiting.count(f.state) > 0;
        } else if constexpr (std::is_same_v<T, RelativePoseFactor>) {
          return exiting.count(f.measurement.i) > 0 || exiting.count(f.measurement.j) > 0;
        } else if constexpr (std::is_same_v<T, PriorFactor>) {
          return exiting.count(f.state) > 0;
        } else {
          for (StateId s : f.states) {
            if (exiting.count(s)) return true;
          }
          return false;
        }
      },
      factor);
}

}  // namespace

MarginalPriorFactor marginalize(const std::vector<Factor>& factors, const Values& values,
                                const std::vector<StateId>& exiting_list) {
  const std::set<StateId> exiting(exiting_list.begin(), exiting_list.end());

  // Factors to eliminate and the boundary they reach.
  std::vector<const Factor*> eliminated;
  std::set<StateId> boundary;
  for (const Factor& f : factors) {
    if (!touches_exiting(f, exiting)) continue;
    if (std::holds_alternative<ProjectionFactor>(f)) {
      throw std::logic_error("marginalize: projection factor still attached to an exiting state");
    }
    eliminated.push_back(&f);
    const LinearizedFactor lin = linearize_factor(f, values);
    for (const auto& [id, jac] : lin.pose_jacobians) {
      if (!exiting.count(id)) boundary.insert(id);
    }
  }

  MarginalPriorFactor prior;
  prior.states.assign(boundary.begin(), boundary.end());
  for (StateId s : prior.states) prior.linearization.push_back(values.poses.at(s));
  if (eliminated.empty() || boundary.empty()) {
    prior.sqrt_info.resize(0, 6 * static_cast<Eigen::Index>(prior.states.size()));
    prior.rhs.resize(0);
    return prior;
  }

  // Dense ordering: exiting states first, boundary after.
  std::map<StateId, int> offset;
  int dim = 0;
  for (StateId s : exiting) {
    offset[s] = dim;
    dim += 6;
  }
  const int m = dim;
  for (StateId s : prior.states) {
    offset[s] = dim;
    dim += 6;
  }
  const int b = dim - m;

  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  for (const Factor* f : eliminated) {
    const LinearizedFactor lin = linearize_factor(*f, values);
    if (!lin.valid) continue;
    const Eigen::VectorXd omega_r = lin.information * lin.residual;
    for (const auto& [id_a, jac_a] : lin.pose_jacobians) {
      const int oa = offset.at(id_a);
      g.segment(oa, 6) += jac_a.transpose() * omega_r;
      for (const auto& [id_b, jac_b] : lin.pose_jacobians) {
        h.block(oa, offset.at(id_b), 6, 6) += jac_a.transpose() * lin.information * jac_b;
      }
    }
  }

  const Eigen::MatrixXd h_mm = h.topLeftCorner(m, m);
  const Eigen::MatrixXd h_bm = h.bottomLeftCorner(b, m);
  const Eigen::MatrixXd h_bb = h.bottomRightCorner(b, b);
  const Eigen::VectorXd g_m = g.head(m);
  const Eigen::VectorXd g_b = g.tail(b);

  // Schur complement onto the boundary. h_mm is invertible whenever the
  // eliminated states were constrained (prior or odometry chain).
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(h_mm);
  const Eigen::MatrixXd h_mm_inv_h_mb = ldlt.solve(h_bm.transpose());
  const Eigen::MatrixXd h_marg = h_bb - h_bm * h_mm_inv_h_mb;
  const Eigen::VectorXd g_marg = g_b - h_bm * ldlt.solve(g_m);

  // Square-root form through an eigendecomposition, dropping null directions.
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (h_marg + h_marg.transpose()));
  const double floor = 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff());
  std::vector<int> kept;
  for (int k = 0; k < eig.eigenvalues().size(); ++k) {
    if (eig.eigenvalues()(k) > floor) kept.push_back(k);
  }
  Eigen::MatrixXd a(static_cast<Eigen::Index>(kept.size()), b);
  Eigen::VectorXd c(static_cast<Eigen::Index>(kept.size()));
  for (size_t r = 0; r < kept.size(); ++r) {
    const double lam = eig.eigenvalues()(kept[r]);
    const Eigen::VectorXd v = eig.eigenvectors().col(kept[r]);
    a.row(static_cast<Eigen::Index>(r)) = std::sqrt(lam) * v.transpose();
    c(static_cast<Eigen::Index>(r)) = -v.dot(g_marg) / std::sqrt(lam);
  }
  prior.sqrt_info = std::move(a);
  prior.rhs = std::move(c);
  return prior;
}

}  // namespace vantage::backend
