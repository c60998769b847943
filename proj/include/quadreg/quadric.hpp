#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>

#include "quadreg/common.hpp"
#include "quadreg/se3.hpp"

namespace quadreg {

// 10 implicit-surface coefficients [A,B,C,D,E,F,G,H,I,J] of
//   A x^2 + B y^2 + C z^2 + 2D xy + 2E xz + 2F yz + 2G x + 2H y + 2I z + J = 0.
using Vec10 = Eigen::Matrix<double, 10, 1>;

enum class QuadricType {
  Point,
  Line,
  Plane,
  Sphere,
  Cylinder,
  Cone,
  Ellipsoid,
  EllipticCylinder,
  EllipticCone,
  Unclassified,
};

inline const char* to_string(QuadricType t) {
  switch (t) {
    case QuadricType::Point: return "point";
    case QuadricType::Line: return "line";
    case QuadricType::Plane: return "plane";
    case QuadricType::Sphere: return "sphere";
    case QuadricType::Cylinder: return "cylinder";
    case QuadricType::Cone: return "cone";
    case QuadricType::Ellipsoid: return "ellipsoid";
    case QuadricType::EllipticCylinder: return "elliptic_cylinder";
    case QuadricType::EllipticCone: return "elliptic_cone";
    default: return "unclassified";
  }
}

enum class CenterClass { Central, LinearCenter, PlanarCenter };

// 4x4 symmetric matrix form of a quadric with block accessors.
struct QuadricMatrix {
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();

  static QuadricMatrix from(const Eigen::Matrix4d& raw) {
    QuadricMatrix q;
    q.m = 0.5 * (raw + raw.transpose());
    return q;
  }

  Eigen::Matrix3d block33() const { return m.topLeftCorner<3, 3>(); }
  Eigen::Vector3d l() const { return m.topRightCorner<3, 1>(); }
  double k() const { return m(3, 3); }

  double evaluate(const Eigen::Vector3d& x) const {
    Eigen::Vector4d h(x.x(), x.y(), x.z(), 1.0);
    return h.dot(m * h);
  }
};

struct CanonicalForm {
  Eigen::Vector3d lambda = Eigen::Vector3d::Zero();  // descending
  double c44 = 0.0;
  std::array<int, 4> signature{0, 0, 0, 0};  // entries in {-1, 0, 1}
};

struct GeometryAttributes {
  Eigen::Vector3d scale = Eigen::Vector3d::Zero();    // meters, 0 on degenerate axes
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Array3i i_s{0, 0, 0};
  Eigen::Array3i i_r{0, 0, 0};
  Eigen::Array3i i_t{0, 0, 0};
  CenterClass center_class = CenterClass::Central;
};

struct Decomposition {
  CanonicalForm canonical;
  GeometryAttributes attributes;
  QuadricType type = QuadricType::Unclassified;
  bool has_center = true;  // false for paraboloid-like inconsistent systems
};

namespace detail {
// An eigenvalue counts as zero below this fraction of the largest magnitude.
constexpr double kEigenZeroRel = 1e-6;
// Two eigenvalues are duplicates (symmetry) below this relative difference.
constexpr double kEigenDupRel = 1e-3;
// Canonical c44 counts as nonzero above this fraction of the Frobenius norm.
constexpr double kC44Rel = 1e-9;

inline bool is_duplicate(double a, double b) {
  return std::abs(a - b) < kEigenDupRel * std::max(std::abs(a), std::abs(b));
}
}  // namespace detail

// Table of per-type degeneracy indicators (scale, rotation, translation).
struct TypeIndicators {
  Eigen::Array3i i_s, i_r, i_t;
  std::array<int, 4> i_c;
};

inline TypeIndicators type_indicators(QuadricType t) {
  switch (t) {
    case QuadricType::Point:
      return {{0, 0, 0}, {0, 0, 0}, {1, 1, 1}, {1, 1, 1, 0}};
    case QuadricType::Line:
      return {{0, 0, 0}, {0, 0, 1}, {1, 1, 0}, {1, 1, 0, 0}};
    case QuadricType::Plane:
      return {{0, 0, 0}, {1, 0, 0}, {1, 0, 0}, {1, 0, 0, 0}};
    case QuadricType::Sphere:
      return {{1, 1, 1}, {0, 0, 0}, {1, 1, 1}, {1, 1, 1, -1}};
    case QuadricType::Ellipsoid:
      return {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1, -1}};
    case QuadricType::Cylinder:
      return {{1, 1, 0}, {0, 0, 1}, {1, 1, 0}, {1, 1, 0, -1}};
    case QuadricType::EllipticCylinder:
      return {{1, 1, 0}, {1, 1, 1}, {1, 1, 0}, {1, 1, 0, -1}};
    case QuadricType::Cone:
      return {{1, 1, 0}, {0, 0, 1}, {1, 1, 1}, {1, 1, -1, 0}};
    case QuadricType::EllipticCone:
      return {{1, 1, 0}, {1, 1, 1}, {1, 1, 1}, {1, 1, -1, 0}};
    default:
      return {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}, {0, 0, 0, 0}};
  }
}

inline QuadricMatrix build_matrix(const Vec10& q) {
  if (q.head<6>().cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::NotAQuadric, "all quadratic coefficients are zero");
  }
  const double a = q[0], b = q[1], c = q[2], d = q[3], e = q[4], f = q[5];
  const double g = q[6], h = q[7], i = q[8], j = q[9];
  QuadricMatrix out;
  out.m << a, d, e, g, d, b, f, h, e, f, c, i, g, h, i, j;
  return out;
}

inline Vec10 flatten(const QuadricMatrix& q) {
  Vec10 v;
  v << q.m(0, 0), q.m(1, 1), q.m(2, 2), q.m(0, 1), q.m(0, 2), q.m(1, 2),
      q.m(0, 3), q.m(1, 3), q.m(2, 3), q.m(3, 3);
  return v;
}

// Surface-normal direction at x: the 3x4 gradient operator applied to [x;1].
inline Eigen::Vector3d gradient(const QuadricMatrix& q,
                                const Eigen::Vector3d& x) {
  Eigen::Vector4d h(x.x(), x.y(), x.z(), 1.0);
  return 2.0 * q.m.topRows<3>() * h;
}

// Q = P^{-T} C P^{-1} with C = diag(lambda, c44).
inline QuadricMatrix compose(const Eigen::Vector3d& lambda, double c44,
                             const RigidTransform& pose) {
  Eigen::Matrix4d c = Eigen::Matrix4d::Zero();
  c.diagonal() << lambda.x(), lambda.y(), lambda.z(), c44;
  const Eigen::Matrix4d p_inv = pose.inverse().matrix();
  return QuadricMatrix::from(p_inv.transpose() * c * p_inv);
}

inline QuadricMatrix compose(const CanonicalForm& canonical,
                             const RigidTransform& pose) {
  return compose(canonical.lambda, canonical.c44, pose);
}

struct CenterSolution {
  Eigen::Vector3d center;
  CenterClass center_class;
};

// Solves Q33 t + l = 0. Rank 3 yields the unique center; rank 2/1 the
// minimum-norm solution on the center line/plane. Inconsistent systems
// (paraboloids) have no center.
inline std::optional<CenterSolution> classify_center(
    const Eigen::Matrix3d& q33, const Eigen::Vector3d& l) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(q33);
  const Eigen::Vector3d lam = es.eigenvalues();
  const Eigen::Matrix3d v = es.eigenvectors();
  const double max_abs = lam.cwiseAbs().maxCoeff();
  const double tol = detail::kEigenZeroRel * max_abs;
  const double consist_tol =
      1e-7 * std::max({max_abs, l.norm(), 1e-300});

  const Eigen::Vector3d b = v.transpose() * l;
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  int rank = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(lam[i]) > tol) {
      y[i] = -b[i] / lam[i];
      ++rank;
    } else if (std::abs(b[i]) > consist_tol) {
      return std::nullopt;  // rank[Q33|l] > rank[Q33]
    }
  }
  if (rank == 0) return std::nullopt;
  CenterClass cls = rank == 3   ? CenterClass::Central
                    : rank == 2 ? CenterClass::LinearCenter
                                : CenterClass::PlanarCenter;
  return CenterSolution{v * y, cls};
}

// Resolves the proportional ambiguity. When the canonical c44 is nonzero the
// matrix is scaled by the nonzero-eigenvalue product ratio of Q33 and Q (which
// pins |c44| = 1); otherwise by the Frobenius norm. Idempotent.
inline QuadricMatrix normalize(const QuadricMatrix& q) {
  const double fro = q.m.norm();
  if (fro == 0.0) {
    throw Error(ErrorCode::NotAQuadric, "zero quadric matrix");
  }

  double c44 = 0.0;
  bool have_c44 = false;
  if (auto sol = classify_center(q.block33(), q.l())) {
    c44 = q.k() + q.l().dot(sol->center);
    have_c44 = true;
  }

  QuadricMatrix out = q;
  if (have_c44 && std::abs(c44) > detail::kC44Rel * fro) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es33(q.block33());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es4(q.m);
    const Eigen::Vector3d l33 = es33.eigenvalues();
    const Eigen::Vector4d l4 = es4.eigenvalues();
    const double tol33 = detail::kEigenZeroRel * l33.cwiseAbs().maxCoeff();
    const double tol4 = detail::kEigenZeroRel * l4.cwiseAbs().maxCoeff();
    double p33 = 1.0, p4 = 1.0;
    for (int i = 0; i < 3; ++i)
      if (std::abs(l33[i]) > tol33) p33 *= l33[i];
    for (int i = 0; i < 4; ++i)
      if (std::abs(l4[i]) > tol4) p4 *= l4[i];
    out.m *= std::abs(p33 / p4);
  } else {
    out.m /= fro;
  }
  return out;
}

namespace detail {

inline QuadricType classify_signature(const std::array<int, 4>& sig,
                                      const Eigen::Vector3d& lambda) {
  const bool dup_ab = is_duplicate(lambda[0], lambda[1]);
  const bool dup_bc = is_duplicate(lambda[1], lambda[2]);
  const std::array<int, 4> s = sig;
  if (s == std::array<int, 4>{1, 1, 1, 0}) return QuadricType::Point;
  if (s == std::array<int, 4>{1, 1, 0, 0}) return QuadricType::Line;
  if (s == std::array<int, 4>{1, 0, 0, 0}) return QuadricType::Plane;
  if (s == std::array<int, 4>{1, 1, 1, -1}) {
    return (dup_ab && dup_bc) ? QuadricType::Sphere : QuadricType::Ellipsoid;
  }
  if (s == std::array<int, 4>{1, 1, 0, -1}) {
    return dup_ab ? QuadricType::Cylinder : QuadricType::EllipticCylinder;
  }
  if (s == std::array<int, 4>{1, 1, -1, 0}) {
    return dup_ab ? QuadricType::Cone : QuadricType::EllipticCone;
  }
  return QuadricType::Unclassified;
}

// Rotation indicators by symmetry analysis: duplicated eigenvalues make the
// axes within the duplicate group arbitrary.
inline Eigen::Array3i rotation_indicators(QuadricType type,
                                          const Eigen::Vector3d& lambda) {
  switch (type) {
    case QuadricType::Point:
    case QuadricType::Sphere: return {0, 0, 0};
    case QuadricType::Line:
    case QuadricType::Cylinder:
    case QuadricType::Cone: return {0, 0, 1};
    case QuadricType::Plane: return {1, 0, 0};
    case QuadricType::Ellipsoid: {
      const bool dup_ab = is_duplicate(lambda[0], lambda[1]);
      const bool dup_bc = is_duplicate(lambda[1], lambda[2]);
      if (dup_ab) return {0, 0, 1};  // spheroid about axis c
      if (dup_bc) return {1, 0, 0};  // spheroid about axis a
      return {1, 1, 1};
    }
    case QuadricType::EllipticCylinder:
    case QuadricType::EllipticCone: return {1, 1, 1};
    default: return {0, 0, 0};
  }
}

}  // namespace detail

// Eigen-decomposes the normalized quadric into canonical form, geometric
// attributes and the Table-driven type label. Unmatched signatures come back
// Unclassified with best-effort attributes.
inline Decomposition decompose(const QuadricMatrix& q_in) {
  const QuadricMatrix qn = normalize(q_in);
  Eigen::Matrix4d m = qn.m;

  auto eig_desc = [](const Eigen::Matrix3d& a, Eigen::Vector3d& lam,
                     Eigen::Matrix3d& vec) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(a);
    // Eigen returns ascending; flip to the descending signed convention.
    lam = es.eigenvalues().reverse();
    vec = es.eigenvectors().rowwise().reverse();
  };

  Eigen::Vector3d lam;
  Eigen::Matrix3d v;
  eig_desc(m.topLeftCorner<3, 3>(), lam, v);

  // A quadric and its negation are the same surface; flip so positive
  // eigenvalues dominate (puts cone's negative eigenvalue last).
  {
    const double tol = detail::kEigenZeroRel * lam.cwiseAbs().maxCoeff();
    int pos = 0, neg = 0;
    for (int i = 0; i < 3; ++i) {
      if (lam[i] > tol) ++pos;
      else if (lam[i] < -tol) ++neg;
    }
    if (neg > pos) {
      m = -m;
      eig_desc(m.topLeftCorner<3, 3>(), lam, v);
    }
  }

  const Eigen::Vector3d l = m.topRightCorner<3, 1>();
  const double k = m(3, 3);
  const double zero_tol = detail::kEigenZeroRel * lam.cwiseAbs().maxCoeff();

  Decomposition out;

  // Center from the eigenbasis; minimum-norm on degenerate axes.
  const Eigen::Vector3d b = v.transpose() * l;
  Eigen::Vector3d y = Eigen::Vector3d::Zero();
  int rank = 0;
  bool consistent = true;
  const double consist_tol =
      1e-7 * std::max({lam.cwiseAbs().maxCoeff(), l.norm(), 1e-300});
  for (int i = 0; i < 3; ++i) {
    if (std::abs(lam[i]) > zero_tol) {
      y[i] = -b[i] / lam[i];
      ++rank;
    } else if (std::abs(b[i]) > consist_tol) {
      consistent = false;
    }
  }
  const Eigen::Vector3d center = v * y;
  out.has_center = consistent && rank > 0;
  out.attributes.center = center;
  out.attributes.center_class = rank == 3   ? CenterClass::Central
                                : rank == 2 ? CenterClass::LinearCenter
                                            : CenterClass::PlanarCenter;

  const double c44 = k + l.dot(center);
  out.canonical.lambda = lam;
  out.canonical.c44 = c44;

  auto sgn = [](double x, double tol) { return x > tol ? 1 : (x < -tol ? -1 : 0); };
  // Normalized matrices live at unit scale, so a fixed tolerance suffices.
  const double sig_tol = 1e-6;
  out.canonical.signature = {sgn(lam[0], zero_tol), sgn(lam[1], zero_tol),
                             sgn(lam[2], zero_tol), sgn(c44, sig_tol)};

  out.type = out.has_center
                 ? detail::classify_signature(out.canonical.signature, lam)
                 : QuadricType::Unclassified;

  const TypeIndicators ind = type_indicators(out.type);
  out.attributes.i_s = ind.i_s;
  out.attributes.i_t = ind.i_t;
  out.attributes.i_r = detail::rotation_indicators(out.type, lam);

  // With c44 = 0 the eigenvalue magnitudes carry no metric information and
  // the Frobenius norm of Q depends on the pose, so the scale attribute is
  // taken from the direction of the eigenvalue vector instead (only cones
  // have non-degenerate scale here).
  Eigen::Vector3d lam_scale = lam;
  if (out.canonical.signature[3] == 0 && lam.norm() > 0.0) {
    lam_scale = lam / lam.norm();
  }
  for (int i = 0; i < 3; ++i) {
    out.attributes.scale[i] =
        out.attributes.i_s[i] ? std::sqrt(1.0 / std::abs(lam_scale[i])) : 0.0;
  }

  // Deterministic rotation sign convention: every column points toward its
  // largest-magnitude component; det fixed by flipping a degenerate column
  // (or the last column when none is degenerate).
  Eigen::Matrix3d r = v;
  for (int c = 0; c < 3; ++c) {
    int imax = 0;
    r.col(c).cwiseAbs().maxCoeff(&imax);
    if (r(imax, c) < 0) r.col(c) *= -1.0;
  }
  if (r.determinant() < 0) {
    int flip = 2;
    for (int c = 2; c >= 0; --c) {
      if (!out.attributes.i_r[c]) {
        flip = c;
        break;
      }
    }
    r.col(flip) *= -1.0;
  }
  out.attributes.rotation = r;
  return out;
}

// Mean first-order algebraic distance of points to the surface, evaluated in
// the unit space (centroid-centered, max-norm scaled). Near-singular gradient
// rows contribute a capped value of 1.
inline double taubin_distance(std::span<const Eigen::Vector3d> points,
                              const QuadricMatrix& q) {
  if (points.empty()) {
    throw Error(ErrorCode::InputError, "taubin_distance needs at least one point");
  }
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= static_cast<double>(points.size());
  double max_norm = 0.0;
  for (const auto& p : points) max_norm = std::max(max_norm, (p - centroid).norm());
  if (max_norm < 1e-12) max_norm = 1.0;

  // x_unit = (x - centroid) / max_norm; the same similarity is applied to Q.
  Eigen::Matrix4d a_inv = Eigen::Matrix4d::Identity();
  a_inv.topLeftCorner<3, 3>() *= max_norm;
  a_inv.topRightCorner<3, 1>() = centroid;
  const Eigen::Matrix4d qu = a_inv.transpose() * q.m * a_inv;

  // Scale-free evaluation: the ratio cancels any positive scaling of Q, so a
  // normalized copy keeps the singularity thresholds meaningful.
  const double qnorm = qu.norm();
  const Eigen::Matrix4d qs = qnorm > 0 ? Eigen::Matrix4d(qu / qnorm) : qu;

  double sum = 0.0;
  for (const auto& p : points) {
    const Eigen::Vector3d xu = (p - centroid) / max_norm;
    Eigen::Vector4d h(xu.x(), xu.y(), xu.z(), 1.0);
    const double value = std::abs(h.dot(qs * h));
    const double denom = (2.0 * qs.topRows<3>() * h).norm();
    if (denom < 1e-12) {
      // On repeated surfaces (doubled planes) value and gradient vanish
      // together and the limit of the ratio is zero; a vanishing gradient
      // with nonzero value signals genuinely singular geometry.
      sum += value < 1e-12 ? 0.0 : 1.0;
    } else {
      sum += value / denom;
    }
  }
  return sum / static_cast<double>(points.size());
}

}  // namespace quadreg
