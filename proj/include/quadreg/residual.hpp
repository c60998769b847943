#pragma once

#include <Eigen/Dense>
#include <vector>

#include "quadreg/config.hpp"
#include "quadreg/record.hpp"
#include "quadreg/se3.hpp"

namespace quadreg {

// Degeneracy-aware distance between two quadric records under a transform:
// axis misalignment (column-wise cross products) and the center offset in the
// target frame, each masked by the target's indicators. The Jacobian uses the
// right perturbation model, tangent order [dtheta, dt].
struct QuadricResidual {
  Eigen::Matrix<double, 9, 1> e_r = Eigen::Matrix<double, 9, 1>::Zero();
  Eigen::Vector3d e_t = Eigen::Vector3d::Zero();
  Eigen::Matrix<double, 12, 6> jacobian = Eigen::Matrix<double, 12, 6>::Zero();
  double weight = 1.0;

  Eigen::Matrix<double, 12, 1> stacked() const {
    Eigen::Matrix<double, 12, 1> e;
    e << e_r, e_t;
    return e;
  }
  double squared_norm() const { return e_r.squaredNorm() + e_t.squaredNorm(); }
};

inline QuadricResidual quadric_residual(const QuadricRecord& x,
                                        const QuadricRecord& y,
                                        const RigidTransform& t,
                                        double rotation_weight = 1.0) {
  if (x.label != y.label) {
    throw Error(ErrorCode::LabelMismatch,
                "residual requires matching semantic labels");
  }
  QuadricResidual out;
  out.weight = rotation_weight;
  const Eigen::Matrix3d rx = x.rotation();
  const Eigen::Matrix3d ry = y.rotation();

  for (int i = 0; i < 3; ++i) {
    if (!y.i_r[i]) continue;  // masked rows stay exactly zero
    const Eigen::Vector3d rotated = t.rotation * rx.col(i);
    out.e_r.segment<3>(3 * i) = rotation_weight * rotated.cross(ry.col(i));
    out.jacobian.block<3, 3>(3 * i, 0) =
        rotation_weight * skew(ry.col(i)) * t.rotation * skew(rx.col(i));
  }

  const Eigen::Vector3d offset = t.apply(x.t_f) - y.t_f;
  const Eigen::Vector3d in_target = ry.transpose() * offset;
  Eigen::Matrix3d mask_ryt = ry.transpose();
  for (int i = 0; i < 3; ++i) {
    if (y.i_t[i]) {
      out.e_t[i] = in_target[i];
    } else {
      mask_ryt.row(i).setZero();
    }
  }
  out.jacobian.block<3, 3>(9, 0) = -mask_ryt * t.rotation * skew(x.t_f);
  out.jacobian.block<3, 3>(9, 3) = mask_ryt;
  return out;
}

// Maximum relative discrepancy between the analytic Jacobian and central
// finite differences over the six tangent directions.
inline double residual_jacobian_check(const QuadricRecord& x,
                                      const QuadricRecord& y,
                                      const RigidTransform& t,
                                      double rotation_weight = 1.0) {
  const QuadricResidual base = quadric_residual(x, y, t, rotation_weight);
  const double step = 1e-6;
  Eigen::Matrix<double, 12, 6> fd;
  for (int d = 0; d < 6; ++d) {
    Eigen::Matrix<double, 6, 1> delta = Eigen::Matrix<double, 6, 1>::Zero();
    delta[d] = step;
    RigidTransform plus{t.rotation * so3_exp(delta.head<3>()),
                        t.translation + delta.tail<3>()};
    RigidTransform minus{t.rotation * so3_exp(-delta.head<3>()),
                         t.translation - delta.tail<3>()};
    fd.col(d) = (quadric_residual(x, y, plus, rotation_weight).stacked() -
                 quadric_residual(x, y, minus, rotation_weight).stacked()) /
                (2.0 * step);
  }
  const double denom = std::max(1.0, base.jacobian.cwiseAbs().maxCoeff());
  return (fd - base.jacobian).cwiseAbs().maxCoeff() / denom;
}

// Irregular key structures lean at odd angles to the ground: every meaningful
// axis must be within delta_g of parallel or perpendicular to the ground
// normal, otherwise the record is excluded from estimation.
inline bool is_irregular(const QuadricRecord& record,
                         const Eigen::Vector3d& ground_normal,
                         double delta_g_deg) {
  const Eigen::Matrix3d r = record.rotation();
  for (int i = 0; i < 3; ++i) {
    if (!record.i_r[i]) continue;
    const double c = std::clamp(r.col(i).dot(ground_normal), -1.0, 1.0);
    const double theta = std::acos(c) * 180.0 / M_PI;
    const double deviation =
        std::min({theta, std::abs(180.0 - theta), std::abs(90.0 - theta)});
    if (deviation > delta_g_deg) return true;
  }
  return false;
}

inline bool is_key_structure(const QuadricRecord& r) {
  return r.label == labels::kGround || r.label == labels::kPlane ||
         r.label == labels::kLine;
}

// Pseudo-sources along the degenerate center directions of non-central
// quadrics: 2 samples for linear centers, 4 for planar, at the mean
// non-degenerate scale. Each pairs with the original target.
inline std::vector<QuadricRecord> augment_noncentral(const QuadricRecord& x,
                                                     double scale_floor) {
  std::vector<QuadricRecord> out;
  if (x.center_class == CenterClass::Central) return out;

  double sum = 0.0;
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    if (x.i_s[i]) {
      sum += x.s_f[i];
      ++count;
    }
  }
  const double radius =
      std::max(count ? sum / count : x.s_f.mean(), scale_floor);

  const Eigen::Matrix3d r = x.rotation();
  std::vector<Eigen::Vector3d> dirs;
  if (x.center_class == CenterClass::LinearCenter) {
    dirs = {r.col(2)};  // line/cylinder axis
  } else {
    dirs = {r.col(1), r.col(2)};  // in-plane directions (normal is column a)
  }
  for (const auto& d : dirs) {
    for (double sign : {1.0, -1.0}) {
      QuadricRecord pseudo = x;
      pseudo.t_f = x.t_f + sign * radius * d;
      out.push_back(std::move(pseudo));
    }
  }
  return out;
}

}  // namespace quadreg
