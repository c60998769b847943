#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "quadreg/cloud.hpp"
#include "quadreg/config.hpp"
#include "quadreg/extract.hpp"
#include "quadreg/quadric.hpp"

namespace quadreg {

// Semantic label -> quadric type used for fitting.
inline QuadricType assign_quadric_type(int label, SegmentSource source) {
  switch (source) {
    case SegmentSource::Ground: return QuadricType::Plane;
    case SegmentSource::Plane: return QuadricType::Plane;
    case SegmentSource::Line: return QuadricType::Line;
    case SegmentSource::Object:
      if (label == labels::kTrunk) return QuadricType::EllipticCylinder;
      return QuadricType::Ellipsoid;  // vehicles, vegetation, unknown classes
  }
  return QuadricType::Ellipsoid;
}

// Relaxes rank requirements monotonically when a fit is degenerate or fails
// the surface-distance gate.
inline std::optional<QuadricType> fallback_type(QuadricType t) {
  switch (t) {
    case QuadricType::Sphere:
    case QuadricType::Ellipsoid: return QuadricType::EllipticCylinder;
    case QuadricType::Cylinder:
    case QuadricType::EllipticCylinder:
    case QuadricType::Cone:
    case QuadricType::EllipticCone: return QuadricType::Plane;
    case QuadricType::Plane:
    case QuadricType::Line: return QuadricType::Point;
    default: return std::nullopt;
  }
}

struct StatisticalFit {
  QuadricMatrix q;
  Eigen::Vector3d scale;   // k_sigma-scaled deviations, descending
  RigidTransform pose;     // columns ordered to match `scale`
};

// Moment-based fit: centroid + covariance eigenstructure define the pose and
// scale; the canonical diagonal follows the target type's signature. Covariance
// axes map to canonical axes in ascending-sigma order so that the eigenvalue
// convention (lambda descending) puts the plane normal on axis a and the
// line/cylinder axis on axis c.
inline std::optional<StatisticalFit> fit_statistical(
    const std::vector<Eigen::Vector3d>& points, QuadricType target,
    const Config& cfg) {
  if (points.empty()) return std::nullopt;
  const Moments m = compute_moments(points);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.covariance);
  Eigen::Vector3d sigma = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();  // ascending
  Eigen::Matrix3d axes = es.eigenvectors();
  if (axes.determinant() < 0) axes.col(2) *= -1.0;

  constexpr double kRankTol = 1e-4;  // meters; catches exact degeneracy
  switch (target) {
    case QuadricType::Sphere:
    case QuadricType::Ellipsoid:
    case QuadricType::Cylinder:
    case QuadricType::EllipticCylinder:
    case QuadricType::Cone:
    case QuadricType::EllipticCone:
      if (sigma[0] <= kRankTol) return std::nullopt;
      break;
    case QuadricType::Plane:
      if (sigma[1] <= kRankTol) return std::nullopt;
      break;
    case QuadricType::Line:
      if (sigma[2] <= kRankTol) return std::nullopt;
      break;
    case QuadricType::Point:
      break;
    default:
      return std::nullopt;
  }

  Eigen::Vector3d s = cfg.repr.k_sigma * sigma;
  if (target == QuadricType::Sphere) {
    s = Eigen::Vector3d::Constant(s.mean());
  } else if (target == QuadricType::Cylinder || target == QuadricType::Cone) {
    const double radial = 0.5 * (s[0] + s[1]);
    s[0] = s[1] = radial;
  }

  const TypeIndicators ind = type_indicators(target);
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();
  for (int i = 0; i < 3; ++i) {
    if (ind.i_c[i] == 0) continue;
    // Degenerate-scale axes (plane normal, line radials) carry no metric
    // meaning; unit entries keep the canonical form well conditioned.
    const double si = ind.i_s[i] ? std::max(s[i], 1e-3) : 1.0;
    lambda[i] = ind.i_c[i] / (si * si);
  }
  const double c44 = static_cast<double>(ind.i_c[3]);

  const RigidTransform canonical_pose{axes, m.centroid};
  const QuadricMatrix q = compose(lambda, c44, canonical_pose);

  StatisticalFit out;
  out.q = q;
  out.scale = (cfg.repr.k_sigma * sigma).reverse();  // descending
  Eigen::Matrix3d desc;
  desc.col(0) = axes.col(2);
  desc.col(1) = axes.col(1);
  desc.col(2) = axes.col(0);
  if (desc.determinant() < 0) desc.col(1) *= -1.0;
  out.pose = {desc, m.centroid};
  return out;
}

}  // namespace quadreg
