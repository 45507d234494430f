// SPDX-License-Identifier: Apache-2.0

#include "vantage/backend/optimizer.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cmath>

namespace vantage::backend {

namespace {

LinearizedFactor linearize_projection(const ProjectionFactor& f, const Values& values) {
  LinearizedFactor out;
  const Pose& body = values.poses.at(f.state);
  const Vector3d& p_w = values.landmarks.at(f.landmark);

  const Matrix3d r_b = body.rotation().matrix();
  const Matrix3d r_e = f.camera.T_body_camera.rotation().matrix();
  const Vector3d& t_e = f.camera.T_body_camera.translation();

  const Vector3d p_b = r_b.transpose() * (p_w - body.translation());
  const Vector3d p_c = r_e.transpose() * (p_b - t_e);
  if (p_c.z() <= 1e-6) {
    out.valid = false;
    return out;
  }

  const double iz = 1.0 / p_c.z();
  Eigen::Matrix<double, 2, 3> dpi;
  dpi << f.camera.fx * iz, 0, -f.camera.fx * p_c.x() * iz * iz, 0, f.camera.fy * iz,
      -f.camera.fy * p_c.y() * iz * iz;

  out.residual = Eigen::Vector2d(f.camera.fx * p_c.x() * iz + f.camera.cx - f.pixel.x(),
                                 f.camera.fy * p_c.y() * iz + f.camera.cy - f.pixel.y());

  const Eigen::Matrix<double, 2, 3> dpc = dpi * r_e.transpose();
  Eigen::Matrix<double, 2, 6> j_pose;
  j_pose.block<2, 3>(0, 0) = dpc * skew(p_b);          // dtheta
  j_pose.block<2, 3>(0, 3) = dpc * (-r_b.transpose());  // dt
  out.pose_jacobians.emplace_back(f.state, j_pose);
  out.landmark_jacobians.emplace_back(f.landmark, Eigen::MatrixXd(dpc * r_b.transpose()));

  const double w = 1.0 / (f.sigma_px * f.sigma_px);
  out.information = w * Eigen::Matrix2d::Identity();
  return out;
}

LinearizedFactor linearize_relative_pose(const RelativePoseFactor& f, const Values& values) {
  LinearizedFactor out;
  const RelativePoseMeasurement& m = f.measurement;
  const Pose& xi = values.poses.at(m.i);
  const Pose& xj = values.poses.at(m.j);

  const Matrix3d ri = xi.rotation().matrix();
  const Matrix3d rj = xj.rotation().matrix();
  const Matrix3d rbar_t = m.transform.rotation().matrix().transpose();
  const Vector3d t_ij = ri.transpose() * (xj.translation() - xi.translation());

  out.residual = relative_pose_residual(m, xi, xj);
  const Matrix3d jr_inv = so3_right_jacobian_inverse(out.residual.head<3>());

  Eigen::Matrix<double, 6, 6> j_i = Eigen::Matrix<double, 6, 6>::Zero();
  Eigen::Matrix<double, 6, 6> j_j = Eigen::Matrix<double, 6, 6>::Zero();
  j_i.block<3, 3>(0, 0) = -jr_inv * rj.transpose() * ri;
  j_i.block<3, 3>(3, 0) = rbar_t * skew(t_ij);
  j_i.block<3, 3>(3, 3) = -rbar_t * ri.transpose();
  j_j.block<3, 3>(0, 0) = jr_inv;
  j_j.block<3, 3>(3, 3) = rbar_t * ri.transpose();

  out.pose_jacobians.emplace_back(m.i, j_i);
  out.pose_jacobians.emplace_back(m.j, j_j);
  out.information = m.information;
  return out;
}

LinearizedFactor linearize_prior(const PriorFactor& f, const Values& values) {
  LinearizedFactor out;
  const Pose& x = values.poses.at(f.state);
  const Vector3d r_rot = so3_log(f.mean.rotation().matrix().transpose() * x.rotation().matrix());

  Vector6d r;
  r.head<3>() = r_rot;
  r.tail<3>() = x.translation() - f.mean.translation();
  out.residual = r;

  Eigen::Matrix<double, 6, 6> jac = Eigen::Matrix<double, 6, 6>::Zero();
  jac.block<3, 3>(0, 0) = so3_right_jacobian_inverse(r_rot);
  jac.block<3, 3>(3, 3) = Matrix3d::Identity();
  out.pose_jacobians.emplace_back(f.state, jac);
  out.information = f.information;
  return out;
}

Eigen::VectorXd marginal_prior_local(const MarginalPriorFactor& f, const Values& values) {
  const auto n = static_cast<Eigen::Index>(f.states.size());
  Eigen::VectorXd local(6 * n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Pose& x = values.poses.at(f.states[k]);
    const Pose& lin = f.linearization[k];
    local.segment<3>(6 * k) = so3_log(lin.rotation().matrix().transpose() * x.rotation().matrix());
    local.segment<3>(6 * k + 3) = x.translation() - lin.translation();
  }
  return local;
}

LinearizedFactor linearize_marginal_prior(const MarginalPriorFactor& f, const Values& values) {
  LinearizedFactor out;
  const Eigen::VectorXd local = marginal_prior_local(f, values);
  out.residual = f.sqrt_info * local - f.rhs;
  for (size_t k = 0; k < f.states.size(); ++k) {
    Eigen::Matrix<double, 6, 6> dlocal = Eigen::Matrix<double, 6, 6>::Zero();
    dlocal.block<3, 3>(0, 0) =
        so3_right_jacobian_inverse(local.segment<3>(6 * static_cast<Eigen::Index>(k)));
    dlocal.block<3, 3>(3, 3) = Matrix3d::Identity();
    out.pose_jacobians.emplace_back(
        f.states[k],
        Eigen::MatrixXd(f.sqrt_info.middleCols(6 * static_cast<Eigen::Index>(k), 6) * dlocal));
  }
  out.information = Eigen::MatrixXd::Identity(out.residual.size(), out.residual.size());
  return out;
}

double huber_rho(double e, double k) { return e <= k ? e * e : 2.0 * k * e - k * k; }

// IRLS weight for the Huber loss on the whitened residual norm.
double huber_weight(double e, double k) { return e <= k ? 1.0 : k / e; }

// Residual-only evaluation; no Jacobians. Returns the squared weighted
// residual r^T Omega r, or nullopt when the factor is inactive (point behind
// the camera).
std::optional<double> factor_error_sq(const Factor& factor, const Values& values) {
  if (const auto* f = std::get_if<ProjectionFactor>(&factor)) {
    const Pose& body = values.poses.at(f->state);
    const Vector3d p_b =
        body.rotation().matrix().transpose() * (values.landmarks.at(f->landmark) -
                                                body.translation());
    const Vector3d p_c = f->camera.T_body_camera.rotation().matrix().transpose() *
                         (p_b - f->camera.T_body_camera.translation());
    if (p_c.z() <= 1e-6) return std::nullopt;
    const double iz = 1.0 / p_c.z();
    const Vector2d r(f->camera.fx * p_c.x() * iz + f->camera.cx - f->pixel.x(),
                     f->camera.fy * p_c.y() * iz + f->camera.cy - f->pixel.y());
    return r.squaredNorm() / (f->sigma_px * f->sigma_px);
  }
  if (const auto* f = std::get_if<RelativePoseFactor>(&factor)) {
    return relative_pose_factor_value(f->measurement, values.poses.at(f->measurement.i),
                                      values.poses.at(f->measurement.j));
  }
  if (const auto* f = std::get_if<PriorFactor>(&factor)) {
    const Pose& x = values.poses.at(f->state);
    Vector6d r;
    r.head<3>() = so3_log(f->mean.rotation().matrix().transpose() * x.rotation().matrix());
    r.tail<3>() = x.translation() - f->mean.translation();
    return r.dot(f->information * r);
  }
  const auto& f = std::get<MarginalPriorFactor>(factor);
  const Eigen::VectorXd r = f.sqrt_info * marginal_prior_local(f, values) - f.rhs;
  return r.squaredNorm();
}

struct Ordering {
  std::map<StateId, int> pose_offset;
  std::map<LandmarkId, int> landmark_block;  // block index, 3 dims each
  int pose_dim = 0;
};

Ordering make_ordering(const Values& values) {
  Ordering ord;
  int offset = 0;
  for (const auto& [id, pose] : values.poses) {
    ord.pose_offset[id] = offset;
    offset += 6;
  }
  ord.pose_dim = offset;
  int block = 0;
  for (const auto& [id, p] : values.landmarks) ord.landmark_block[id] = block++;
  return ord;
}

Values retract(const Values& values, const Ordering& ord, const Eigen::VectorXd& dx_pose,
               const Eigen::VectorXd& dx_landmark) {
  Values out = values;
  for (auto& [id, pose] : out.poses) {
    const int o = ord.pose_offset.at(id);
    pose = Pose(pose.rotation() * Rotation::exp(dx_pose.segment<3>(o)),
                pose.translation() + dx_pose.segment<3>(o + 3));
  }
  for (auto& [id, p] : out.landmarks) {
    p += dx_landmark.segment<3>(3 * ord.landmark_block.at(id));
  }
  return out;
}

// One landmark's normal-equation blocks: landmarks couple to poses only via
// single-pose projection factors, so the Schur complement is per-landmark.
struct LandmarkSystem {
  Matrix3d h_ll = Matrix3d::Zero();
  Vector3d g_l = Vector3d::Zero();
  std::map<int, Eigen::Matrix<double, 6, 3>> h_pl;  // pose offset -> coupling
};

}  // namespace

LinearizedFactor linearize_factor(const Factor& factor, const Values& values) {
  return std::visit(
      [&](const auto& f) -> LinearizedFactor {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ProjectionFactor>) return linearize_projection(f, values);
        if constexpr (std::is_same_v<T, RelativePoseFactor>)
          return linearize_relative_pose(f, values);
        if constexpr (std::is_same_v<T, PriorFactor>) return linearize_prior(f, values);
        if constexpr (std::is_same_v<T, MarginalPriorFactor>)
          return linearize_marginal_prior(f, values);
      },
      factor);
}

double factor_cost(const Factor& factor, const Values& values, const LmOptions& options) {
  const auto e2 = factor_error_sq(factor, values);
  if (!e2) return 0.0;
  if (options.huber_on_projection && std::holds_alternative<ProjectionFactor>(factor)) {
    return huber_rho(std::sqrt(std::max(0.0, *e2)), options.huber_k);
  }
  return *e2;
}

double total_cost(const std::vector<Factor>& factors, const Values& values,
                  const LmOptions& options, const std::vector<double>* factor_weights) {
  double cost = 0.0;
  for (size_t k = 0; k < factors.size(); ++k) {
    const double w = factor_weights ? (*factor_weights)[k] : 1.0;
    if (w == 0.0) continue;
    cost += w * factor_cost(factors[k], values, options);
  }
  return cost;
}

OptimizeResult optimize(const std::vector<Factor>& factors, Values& values,
                        const LmOptions& options, const std::vector<double>* factor_weights) {
  if (factor_weights && factor_weights->size() != factors.size()) {
    throw std::invalid_argument("optimize: factor_weights size mismatch");
  }
  const Ordering ord = make_ordering(values);
  const int n_landmarks = static_cast<int>(ord.landmark_block.size());

  struct Linearization {
    Eigen::MatrixXd h_pp;  // the pose block stays small; dense is cheapest
    Eigen::VectorXd g_p;
    std::vector<LandmarkSystem> landmarks;
    double cost = 0.0;
  };

  const auto linearize_all = [&](const Values& vals) {
    Linearization lin_out;
    lin_out.h_pp.setZero(ord.pose_dim, ord.pose_dim);
    lin_out.g_p.setZero(ord.pose_dim);
    lin_out.landmarks.assign(n_landmarks, LandmarkSystem{});

    for (size_t k = 0; k < factors.size(); ++k) {
      const double w_gnc = factor_weights ? (*factor_weights)[k] : 1.0;
      if (w_gnc == 0.0) continue;
      const LinearizedFactor lin = linearize_factor(factors[k], vals);
      if (!lin.valid) continue;

      const double e2 = lin.residual.dot(lin.information * lin.residual);
      double w = w_gnc;
      if (options.huber_on_projection && std::holds_alternative<ProjectionFactor>(factors[k])) {
        const double e = std::sqrt(std::max(0.0, e2));
        lin_out.cost += w_gnc * huber_rho(e, options.huber_k);
        w *= huber_weight(e, options.huber_k);
      } else {
        lin_out.cost += w_gnc * e2;
      }

      const Eigen::VectorXd omega_r = lin.information * lin.residual;
      for (const auto& [id_a, jac_a] : lin.pose_jacobians) {
        const int oa = ord.pose_offset.at(id_a);
        lin_out.g_p.segment(oa, jac_a.cols()) += w * jac_a.transpose() * omega_r;
        for (const auto& [id_b, jac_b] : lin.pose_jacobians) {
          const int ob = ord.pose_offset.at(id_b);
          lin_out.h_pp.block(oa, ob, jac_a.cols(), jac_b.cols()) +=
              w * jac_a.transpose() * lin.information * jac_b;
        }
      }
      for (const auto& [lm_id, jac_l] : lin.landmark_jacobians) {
        LandmarkSystem& sys = lin_out.landmarks[ord.landmark_block.at(lm_id)];
        sys.h_ll += w * jac_l.transpose() * lin.information * jac_l;
        sys.g_l += w * jac_l.transpose() * omega_r;
        for (const auto& [id_a, jac_a] : lin.pose_jacobians) {
          const int oa = ord.pose_offset.at(id_a);
          auto it = sys.h_pl.find(oa);
          if (it == sys.h_pl.end()) {
            it = sys.h_pl.emplace(oa, Eigen::Matrix<double, 6, 3>::Zero()).first;
          }
          it->second += w * jac_a.transpose() * lin.information * jac_l;
        }
      }
    }
    return lin_out;
  };

  Linearization lin = linearize_all(values);

  OptimizeResult result;
  result.final_cost = lin.cost;
  double lambda = options.init_lambda;

  for (int it = 0; it < options.max_iterations; ++it) {
    result.iterations = it + 1;

    Eigen::VectorXd dx_pose, dx_landmark;
    bool solved = false;
    while (!solved) {
      // Schur complement of the damped system onto the poses.
      Eigen::MatrixXd s = lin.h_pp;
      s.diagonal().array() += lambda;
      Eigen::VectorXd rhs = -lin.g_p;

      std::vector<Matrix3d> h_ll_inv(n_landmarks);
      std::vector<std::pair<int, Eigen::Matrix<double, 3, 6>>> reduced;
      for (int l = 0; l < n_landmarks; ++l) {
        const LandmarkSystem& sys = lin.landmarks[l];
        const Matrix3d damped = sys.h_ll + lambda * Matrix3d::Identity();
        h_ll_inv[l] = damped.ldlt().solve(Matrix3d::Identity());
        reduced.clear();
        for (const auto& [ob, h_bl] : sys.h_pl) {
          reduced.emplace_back(ob, h_ll_inv[l] * h_bl.transpose());
        }
        for (const auto& [oa, h_al] : sys.h_pl) {
          rhs.segment<6>(oa) += h_al * (h_ll_inv[l] * sys.g_l);
          for (const auto& [ob, t] : reduced) s.block<6, 6>(oa, ob) -= h_al * t;
        }
      }

      const Eigen::LDLT<Eigen::MatrixXd> solver(s);
      if (solver.info() == Eigen::Success) {
        dx_pose = solver.solve(rhs);
        solved = dx_pose.allFinite();
      }
      if (solved) {
        dx_landmark.resize(3 * n_landmarks);
        for (const auto& [lm_id, block] : ord.landmark_block) {
          const LandmarkSystem& sys = lin.landmarks[block];
          Vector3d back = -sys.g_l;
          for (const auto& [oa, h_al] : sys.h_pl) {
            back -= h_al.transpose() * dx_pose.segment<6>(oa);
          }
          dx_landmark.segment<3>(3 * block) = h_ll_inv[block] * back;
        }
      } else {
        lambda *= options.lambda_factor;
        if (lambda > options.max_lambda) {
          throw NumericalFailure("optimize: normal system indefinite after damping escalation");
        }
      }
    }

    const Values candidate = retract(values, ord, dx_pose, dx_landmark);
    const double new_cost = total_cost(factors, candidate, options, factor_weights);

    if (new_cost <= lin.cost) {
      values = candidate;
      const double max_dx =
          std::max(dx_pose.lpNorm<Eigen::Infinity>(),
                   n_landmarks ? dx_landmark.lpNorm<Eigen::Infinity>() : 0.0);
      const double improvement = lin.cost - new_cost;
      lambda = std::max(1e-12, lambda / options.lambda_factor);
      if (max_dx < options.tol_dx ||
          improvement <= options.tol_relative_cost * std::max(1.0, lin.cost)) {
        result.converged = true;
        result.final_cost = new_cost;
        return result;
      }
      lin = linearize_all(values);
      result.final_cost = lin.cost;
    } else {
      lambda *= options.lambda_factor;
      if (lambda > options.max_lambda) break;  // stalled; keep current values
    }
  }
  return result;
}

}  // namespace vantage::backend
