#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace quadreg {

inline Eigen::Matrix3d skew(const Eigen::Vector3d& v) {
  Eigen::Matrix3d m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

// Rodrigues formula; safe near the identity.
inline Eigen::Matrix3d so3_exp(const Eigen::Vector3d& w) {
  const double theta = w.norm();
  if (theta < 1e-12) {
    return Eigen::Matrix3d::Identity() + skew(w);
  }
  const Eigen::Vector3d axis = w / theta;
  const Eigen::Matrix3d k = skew(axis);
  return Eigen::Matrix3d::Identity() + std::sin(theta) * k +
         (1.0 - std::cos(theta)) * k * k;
}

inline Eigen::Vector3d so3_log(const Eigen::Matrix3d& r) {
  const double c = std::clamp((r.trace() - 1.0) / 2.0, -1.0, 1.0);
  const double theta = std::acos(c);
  if (theta < 1e-12) {
    return Eigen::Vector3d(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0),
                           r(1, 0) - r(0, 1)) /
           2.0;
  }
  if (theta > M_PI - 1e-6) {
    // Near pi the sine formula degenerates; recover the axis from R + I.
    Eigen::Matrix3d a = (r + Eigen::Matrix3d::Identity()) / 2.0;
    int i = 0;
    a.diagonal().maxCoeff(&i);
    Eigen::Vector3d axis = a.col(i) / std::sqrt(std::max(a(i, i), 1e-12));
    axis.normalize();
    return theta * axis;
  }
  Eigen::Vector3d v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
  return theta / (2.0 * std::sin(theta)) * v;
}

struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Eigen::Vector3d apply(const Eigen::Vector3d& x) const {
    return rotation * x + translation;
  }

  RigidTransform compose(const RigidTransform& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  RigidTransform inverse() const {
    return {rotation.transpose(), -(rotation.transpose() * translation)};
  }

  Eigen::Matrix4d matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
  }

  static RigidTransform from_matrix(const Eigen::Matrix4d& m) {
    return {m.topLeftCorner<3, 3>(), m.topRightCorner<3, 1>()};
  }

  bool is_orthonormal(double tol = 1e-9) const {
    return (rotation * rotation.transpose() - Eigen::Matrix3d::Identity())
                   .cwiseAbs()
                   .maxCoeff() < tol &&
           rotation.determinant() > 0.0;
  }
};

// Re-projects a near-rotation onto SO(3), keeping det positive.
inline Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

inline Eigen::Quaterniond to_quaternion(const Eigen::Matrix3d& r) {
  Eigen::Quaterniond q(r);
  q.normalize();
  if (q.w() < 0) q.coeffs() *= -1.0;  // hemisphere convention
  return q;
}

}  // namespace quadreg
