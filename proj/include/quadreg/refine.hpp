#pragma once

#include <Eigen/Dense>
#include <vector>

#include "quadreg/matching.hpp"
#include "quadreg/residual.hpp"

namespace quadreg {

struct RefineResult {
  RigidTransform transform;
  bool converged = true;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
};

namespace detail {

// The residual set for one inlier candidate: irregular structures filtered,
// non-central sources augmented with pseudo-correspondences.
inline std::vector<std::pair<QuadricRecord, const QuadricRecord*>>
collect_factors(const SceneRepresentation& rx, const SceneRepresentation& ry,
                const std::vector<Correspondence>& pairs, const Config& cfg) {
  std::vector<std::pair<QuadricRecord, const QuadricRecord*>> factors;
  for (const auto& c : pairs) {
    const QuadricRecord& x = rx.at(c.source_index);
    const QuadricRecord& y = ry.at(c.target_index);
    if (is_key_structure(x) &&
        is_irregular(x, rx.ground_normal, cfg.reg.irregular_angle_deg)) {
      continue;
    }
    if (is_key_structure(y) &&
        is_irregular(y, ry.ground_normal, cfg.reg.irregular_angle_deg)) {
      continue;
    }
    factors.emplace_back(x, &y);
    for (auto& pseudo : augment_noncentral(x, cfg.repr.scale_floor)) {
      factors.emplace_back(std::move(pseudo), &y);
    }
  }
  return factors;
}

}  // namespace detail

// Levenberg-Marquardt over SE(3) with right-multiplicative rotation updates.
// Only improving steps are accepted, so the final cost never exceeds the
// initial one.
inline RefineResult refine(const SceneRepresentation& rx,
                           const SceneRepresentation& ry,
                           const std::vector<Correspondence>& clique_pairs,
                           const RigidTransform& t0, const Config& cfg) {
  RefineResult result;
  result.transform = t0;

  const auto factors = detail::collect_factors(rx, ry, clique_pairs, cfg);
  if (factors.empty()) {
    return result;
  }

  const double w_rot = cfg.reg.rotation_weight;
  auto total_cost = [&](const RigidTransform& t) {
    double cost = 0.0;
    for (const auto& [x, y] : factors) {
      cost += quadric_residual(x, *y, t, w_rot).squared_norm();
    }
    return cost;
  };

  RigidTransform current = t0;
  double cost = total_cost(current);
  result.initial_cost = cost;
  double damping = cfg.reg.lm_initial_damping;
  bool converged = false;

  for (int it = 0; it < cfg.reg.lm_max_iterations && !converged; ++it) {
    ++result.iterations;
    Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
    for (const auto& [x, y] : factors) {
      const QuadricResidual r = quadric_residual(x, *y, current, w_rot);
      h += r.jacobian.transpose() * r.jacobian;
      g += r.jacobian.transpose() * r.stacked();
    }

    bool accepted = false;
    for (int attempt = 0; attempt < 12 && !accepted && !converged; ++attempt) {
      Eigen::Matrix<double, 6, 6> damped = h;
      damped.diagonal().array() += damping;
      const Eigen::Matrix<double, 6, 1> delta = damped.ldlt().solve(-g);
      if (!delta.allFinite()) {
        damping *= 10.0;
        continue;
      }
      if (delta.norm() < cfg.reg.lm_step_tolerance) {
        converged = true;  // stationary at the working damping scale
        break;
      }
      const RigidTransform trial{current.rotation * so3_exp(delta.head<3>()),
                                 current.translation + delta.tail<3>()};
      const double trial_cost = total_cost(trial);
      if (trial_cost < cost) {
        current = trial;
        cost = trial_cost;
        damping = std::max(damping / 10.0, 1e-12);
        accepted = true;
      } else {
        damping *= 10.0;
      }
    }
    if (!accepted && !converged) {
      converged = true;  // damping schedule exhausted without improvement
    }
  }

  result.transform = current;
  result.final_cost = cost;
  result.converged = converged;
  return result;
}

}  // namespace quadreg
