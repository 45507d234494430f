// SPDX-License-Identifier: Apache-2.0
//
// Sparse Levenberg-Marquardt over factor graphs on the decoupled tangent.
// Information matrices may be singular (scale-less and rotation-only loop
// factors); the normal equations are assembled directly from J^T Omega J so
// no per-factor inversion or square root is required.

#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "vantage/backend/factors.hpp"

namespace vantage::backend {

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LmOptions {
  int max_iterations = 50;
  double init_lambda = 1e-4;
  double lambda_factor = 10.0;
  double max_lambda = 1e12;
  double tol_dx = 1e-8;
  double tol_relative_cost = 1e-8;  // stop when accepted steps stall
  bool huber_on_projection = true;
  double huber_k = 1.345;  // on the whitened projection residual norm
};

struct OptimizeResult {
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// One linearized factor: residual, per-variable Jacobians, information.
struct LinearizedFactor {
  Eigen::VectorXd residual;
  std::vector<std::pair<StateId, Eigen::MatrixXd>> pose_jacobians;
  std::vector<std::pair<LandmarkId, Eigen::MatrixXd>> landmark_jacobians;
  Eigen::MatrixXd information;
  bool valid = true;  // false when e.g. a point sits behind the camera
};

LinearizedFactor linearize_factor(const Factor& factor, const Values& values);

/// Robust cost of a factor at the current values (Huber on projection
/// residuals when enabled, quadratic otherwise).
double factor_cost(const Factor& factor, const Values& values, const LmOptions& options);

/// Levenberg-Marquardt. `factor_weights`, when given, scales each factor's
/// cost and information (GNC uses this; entry order matches `factors`).
/// Throws NumericalFailure when the damped system cannot be factorized.
OptimizeResult optimize(const std::vector<Factor>& factors, Values& values,
                        const LmOptions& options = {},
                        const std::vector<double>* factor_weights = nullptr);

/// Total (optionally weighted, robust) cost at the given values.
double total_cost(const std::vector<Factor>& factors, const Values& values,
                  const LmOptions& options = {},
                  const std::vector<double>* factor_weights = nullptr);

}  // namespace vantage::backend
