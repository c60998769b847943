#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "quadreg/quadric.hpp"
#include "quadreg/record.hpp"
#include "quadreg/se3.hpp"

namespace quadreg::testing {

inline Eigen::Matrix3d random_rotation(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline RigidTransform random_pose(Rng& rng, double max_translation = 10.0) {
  std::uniform_real_distribution<double> u(-max_translation, max_translation);
  return {random_rotation(rng), Eigen::Vector3d(u(rng), u(rng), u(rng))};
}

// Canonical diagonal for a type from explicit scales (meters). Scales with a
// separation of at least 5% so duplicate detection is unambiguous.
inline CanonicalForm canonical_for(QuadricType type,
                                   const Eigen::Vector3d& scale) {
  CanonicalForm c;
  const double sa = scale.x(), sb = scale.y(), sc = scale.z();
  switch (type) {
    case QuadricType::Point:
      c.lambda = {1.0, 1.0, 1.0};
      c.c44 = 0.0;
      break;
    case QuadricType::Line:
      c.lambda = {1.0, 1.0, 0.0};
      c.c44 = 0.0;
      break;
    case QuadricType::Plane:
      c.lambda = {1.0, 0.0, 0.0};
      c.c44 = 0.0;
      break;
    case QuadricType::Sphere:
      c.lambda = {1.0 / (sa * sa), 1.0 / (sa * sa), 1.0 / (sa * sa)};
      c.c44 = -1.0;
      break;
    case QuadricType::Ellipsoid:
      c.lambda = {1.0 / (sa * sa), 1.0 / (sb * sb), 1.0 / (sc * sc)};
      c.c44 = -1.0;
      break;
    case QuadricType::Cylinder:
      c.lambda = {1.0 / (sa * sa), 1.0 / (sa * sa), 0.0};
      c.c44 = -1.0;
      break;
    case QuadricType::EllipticCylinder:
      c.lambda = {1.0 / (sa * sa), 1.0 / (sb * sb), 0.0};
      c.c44 = -1.0;
      break;
    case QuadricType::Cone:
      c.lambda = {1.0 / (sa * sa), 1.0 / (sa * sa), -1.0 / (sc * sc)};
      c.c44 = 0.0;
      break;
    case QuadricType::EllipticCone:
      c.lambda = {1.0 / (sa * sa), 1.0 / (sb * sb), -1.0 / (sc * sc)};
      c.c44 = 0.0;
      break;
    default:
      c.lambda = {1.0, 1.0, 1.0};
      c.c44 = -1.0;
      break;
  }
  return c;
}

// Ascending scales with pairwise separation, suitable for canonical_for
// (canonical convention: lambda descending means scale ascending).
inline Eigen::Vector3d random_scales(Rng& rng) {
  std::uniform_real_distribution<double> u(0.3, 4.0);
  Eigen::Vector3d s(u(rng), u(rng), u(rng));
  std::sort(s.data(), s.data() + 3);
  s.y() = std::max(s.y(), 1.10 * s.x());
  s.z() = std::max(s.z(), 1.10 * s.y());
  return s;
}

// For circularly symmetric types the first two scales must match exactly.
inline Eigen::Vector3d symmetric_scales(QuadricType type,
                                        const Eigen::Vector3d& s) {
  Eigen::Vector3d out = s;
  if (type == QuadricType::Sphere) out = Eigen::Vector3d::Constant(s.x());
  if (type == QuadricType::Cylinder || type == QuadricType::Cone)
    out.y() = out.x();
  return out;
}

// In-memory record with consistent attributes for matching/registration
// tests, bypassing the fitting pipeline.
inline QuadricRecord make_record(QuadricType type, const Eigen::Vector3d& scale,
                                 const RigidTransform& pose, int label) {
  QuadricRecord r;
  r.label = label;
  r.type = type;
  const TypeIndicators ind = type_indicators(type);
  r.i_s = ind.i_s;
  r.i_r = ind.i_r;
  r.i_t = ind.i_t;
  switch (type) {
    case QuadricType::Line:
    case QuadricType::Cylinder:
    case QuadricType::EllipticCylinder:
      r.center_class = CenterClass::LinearCenter;
      break;
    case QuadricType::Plane:
      r.center_class = CenterClass::PlanarCenter;
      break;
    default:
      r.center_class = CenterClass::Central;
      break;
  }
  r.s_f = scale.cwiseMax(0.05);
  r.eta_f = to_quaternion(pose.rotation);
  r.t_f = pose.translation;
  r.q = flatten(normalize(compose(canonical_for(type, scale), pose)));
  return r;
}

// Moves a record rigidly (the transform acts on the scene).
inline QuadricRecord transform_record(const QuadricRecord& r,
                                      const RigidTransform& f) {
  QuadricRecord out = r;
  out.t_f = f.apply(r.t_f);
  out.eta_f = to_quaternion(f.rotation * r.rotation());
  const Eigen::Matrix4d p_inv = f.inverse().matrix();
  out.q = flatten(QuadricMatrix::from(p_inv.transpose() *
                                      build_matrix(r.q).m * p_inv));
  return out;
}

inline std::vector<Eigen::Vector3d> sample_sphere(Rng& rng,
                                                  const Eigen::Vector3d& center,
                                                  double radius, int n,
                                                  double noise = 0.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    Eigen::Vector3d d(g(rng), g(rng), g(rng));
    d.normalize();
    Eigen::Vector3d p = center + radius * d;
    if (noise > 0) p += noise * Eigen::Vector3d(g(rng), g(rng), g(rng));
    pts.push_back(p);
  }
  return pts;
}

}  // namespace quadreg::testing
