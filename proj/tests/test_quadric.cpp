#include <catch2/catch_amalgamated.hpp>

#include "quadreg/quadric.hpp"
#include "support/helpers.hpp"

using namespace quadreg;
namespace qt = quadreg::testing;

namespace {

Vec10 random_coefficients(Rng& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  Vec10 q;
  for (int i = 0; i < 10; ++i) q[i] = u(rng);
  if (q.head<6>().cwiseAbs().maxCoeff() < 0.1) q[0] = 1.0;
  return q;
}

}  // namespace

TEST_CASE("build_matrix lays out coefficients and round-trips") {
  Vec10 sphere;
  sphere << 1, 1, 1, 0, 0, 0, 0, 0, 0, -1;
  const QuadricMatrix q = build_matrix(sphere);
  Eigen::Matrix4d expected = Eigen::Matrix4d::Identity();
  expected(3, 3) = -1;
  CHECK((q.m - expected).cwiseAbs().maxCoeff() == 0.0);

  Vec10 planes = Vec10::Zero();
  planes[0] = 1;  // x^2 = 0, pair of coincident planes
  const QuadricMatrix p = build_matrix(planes);
  CHECK(p.m(0, 0) == 1.0);
  CHECK(p.m.cwiseAbs().sum() == 1.0);

  Rng rng = make_rng(17);
  for (int i = 0; i < 1000; ++i) {
    const Vec10 q0 = random_coefficients(rng);
    const Vec10 q1 = flatten(build_matrix(q0));
    REQUIRE((q1 - q0).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("build_matrix rejects an all-zero quadratic block") {
  Vec10 q = Vec10::Zero();
  q[6] = 1.0;  // linear-only
  CHECK_THROWS_AS(build_matrix(q), Error);
}

TEST_CASE("gradient matches closed forms") {
  Vec10 sphere;
  sphere << 1, 1, 1, 0, 0, 0, 0, 0, 0, -1;
  const QuadricMatrix q = build_matrix(sphere);
  const Eigen::Vector3d g = gradient(q, {1, 0, 0});
  CHECK((g - Eigen::Vector3d(2, 0, 0)).norm() < 1e-15);

  Vec10 plane = Vec10::Zero();
  plane[0] = 0;
  plane[8] = 0.5;  // f = z
  QuadricMatrix pm;
  pm.m = Eigen::Matrix4d::Zero();
  pm.m(2, 3) = pm.m(3, 2) = 0.5;
  const Eigen::Vector3d gp = gradient(pm, {3, -2, 7});
  CHECK((gp - Eigen::Vector3d(0, 0, 1)).norm() < 1e-15);
}

TEST_CASE("gradient matches central finite differences") {
  Rng rng = make_rng(23);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 1000; ++trial) {
    const QuadricMatrix q = build_matrix(random_coefficients(rng));
    const Eigen::Vector3d x(u(rng), u(rng), u(rng));
    const Eigen::Vector3d g = gradient(q, x);
    Eigen::Vector3d fd;
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d hi = Eigen::Vector3d::Zero();
      hi[i] = h;
      fd[i] = (q.evaluate(x + hi) - q.evaluate(x - hi)) / (2 * h);
    }
    const double scale = std::max(1.0, g.norm());
    REQUIRE((g - fd).norm() / scale < 1e-6);
  }
}

TEST_CASE("compose with identity pose reproduces the canonical diagonal") {
  const CanonicalForm c = qt::canonical_for(QuadricType::Ellipsoid, {1, 2, 3});
  const QuadricMatrix q = compose(c, RigidTransform::identity());
  Eigen::Matrix4d expected = Eigen::Matrix4d::Zero();
  expected.diagonal() << c.lambda.x(), c.lambda.y(), c.lambda.z(), c.c44;
  CHECK((q.m - expected).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("compose then decompose recovers sphere center") {
  const CanonicalForm c = qt::canonical_for(QuadricType::Sphere, {2, 2, 2});
  RigidTransform pose;
  pose.translation = {4, -1, 2.5};
  const Decomposition d = decompose(compose(c, pose));
  CHECK(d.type == QuadricType::Sphere);
  CHECK((d.attributes.center - pose.translation).norm() < 1e-9);
  CHECK((d.attributes.scale - Eigen::Vector3d(2, 2, 2)).norm() < 1e-9);
}

TEST_CASE("compose then decompose maps a rotated cylinder axis") {
  const CanonicalForm c = qt::canonical_for(QuadricType::Cylinder, {0.5, 0.5, 0});
  RigidTransform pose;
  pose.rotation = so3_exp(Eigen::Vector3d(M_PI / 2, 0, 0));  // z-axis -> -y
  const Decomposition d = decompose(compose(c, pose));
  REQUIRE(d.type == QuadricType::Cylinder);
  const Eigen::Vector3d axis = d.attributes.rotation.col(2);
  CHECK(std::abs(std::abs(axis.dot(Eigen::Vector3d::UnitY())) - 1.0) < 1e-9);
}

TEST_CASE("normalize is scale invariant and idempotent") {
  const CanonicalForm c = qt::canonical_for(QuadricType::Sphere, {1, 1, 1});
  const QuadricMatrix q = compose(c, RigidTransform::identity());
  QuadricMatrix q5 = q;
  q5.m *= 5.0;
  CHECK((normalize(q5).m - normalize(q).m).cwiseAbs().maxCoeff() < 1e-9);

  // Plane hits the Frobenius branch.
  const QuadricMatrix plane =
      compose(qt::canonical_for(QuadricType::Plane, {0, 0, 0}),
              RigidTransform::identity());
  CHECK(std::abs(normalize(plane).m.norm() - 1.0) < 1e-12);

  Rng rng = make_rng(5);
  const QuadricType types[] = {
      QuadricType::Point,    QuadricType::Line,     QuadricType::Plane,
      QuadricType::Sphere,   QuadricType::Cylinder, QuadricType::Cone,
      QuadricType::Ellipsoid};
  for (int trial = 0; trial < 100; ++trial) {
    const QuadricType type = types[trial % std::size(types)];
    const Eigen::Vector3d s =
        qt::symmetric_scales(type, qt::random_scales(rng));
    const QuadricMatrix q0 =
        compose(qt::canonical_for(type, s), qt::random_pose(rng));
    const QuadricMatrix n1 = normalize(q0);
    const QuadricMatrix n2 = normalize(n1);
    REQUIRE((n2.m - n1.m).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("normalize rejects the zero matrix") {
  QuadricMatrix z;
  CHECK_THROWS_AS(normalize(z), Error);
}

TEST_CASE("decompose classifies the Table examples") {
  QuadricMatrix sphere;
  sphere.m = Eigen::Vector4d(0.25, 0.25, 0.25, -1).asDiagonal();
  const Decomposition ds = decompose(sphere);
  CHECK(ds.type == QuadricType::Sphere);
  CHECK((ds.attributes.scale - Eigen::Vector3d(2, 2, 2)).norm() < 1e-9);
  CHECK(ds.attributes.center.norm() < 1e-12);
  CHECK((ds.attributes.i_r == Eigen::Array3i(0, 0, 0)).all());
  CHECK((ds.attributes.i_s == Eigen::Array3i(1, 1, 1)).all());
  CHECK(ds.attributes.center_class == CenterClass::Central);

  QuadricMatrix cyl;
  cyl.m = Eigen::Vector4d(1, 1, 0, -1).asDiagonal();
  const Decomposition dc = decompose(cyl);
  CHECK(dc.type == QuadricType::Cylinder);
  CHECK((dc.attributes.i_s == Eigen::Array3i(1, 1, 0)).all());
  CHECK((dc.attributes.i_t == Eigen::Array3i(1, 1, 0)).all());
  CHECK((dc.attributes.i_r == Eigen::Array3i(0, 0, 1)).all());
  CHECK(dc.attributes.center_class == CenterClass::LinearCenter);
}

TEST_CASE("decompose indicators match the type table for all types") {
  Rng rng = make_rng(99);
  const QuadricType types[] = {
      QuadricType::Point,    QuadricType::Line,
      QuadricType::Plane,    QuadricType::Sphere,
      QuadricType::Cylinder, QuadricType::Cone,
      QuadricType::Ellipsoid, QuadricType::EllipticCylinder,
      QuadricType::EllipticCone};
  for (QuadricType type : types) {
    for (int trial = 0; trial < 25; ++trial) {
      const Eigen::Vector3d s =
          qt::symmetric_scales(type, qt::random_scales(rng));
      const Decomposition d =
          decompose(compose(qt::canonical_for(type, s), qt::random_pose(rng)));
      INFO("type " << to_string(type) << " trial " << trial);
      REQUIRE(d.type == type);
      const TypeIndicators ind = type_indicators(type);
      CHECK((d.attributes.i_s == ind.i_s).all());
      CHECK((d.attributes.i_t == ind.i_t).all());
      CHECK((d.attributes.i_r == ind.i_r).all());
    }
  }
}

TEST_CASE("compose/decompose round trip recovers masked attributes") {
  Rng rng = make_rng(42);
  const QuadricType types[] = {
      QuadricType::Point,  QuadricType::Line,     QuadricType::Plane,
      QuadricType::Sphere, QuadricType::Cylinder, QuadricType::Cone};
  for (QuadricType type : types) {
    const TypeIndicators ind = type_indicators(type);
    for (int trial = 0; trial < 50; ++trial) {
      const Eigen::Vector3d s =
          qt::symmetric_scales(type, qt::random_scales(rng));
      const CanonicalForm c = qt::canonical_for(type, s);
      const RigidTransform pose = qt::random_pose(rng);

      const Decomposition at_origin =
          decompose(compose(c, RigidTransform::identity()));
      const Decomposition d = decompose(compose(c, pose));
      INFO("type " << to_string(type) << " trial " << trial);
      REQUIRE(d.type == type);

      // Scale is pose invariant.
      CHECK((d.attributes.scale - at_origin.attributes.scale).norm() < 1e-8);

      // Center agrees on non-degenerate axes, expressed in the recovered frame.
      const Eigen::Vector3d delta =
          d.attributes.rotation.transpose() *
          (d.attributes.center - pose.translation);
      for (int i = 0; i < 3; ++i) {
        if (ind.i_t[i]) CHECK(std::abs(delta[i]) < 1e-8);
      }

      // Rotation columns agree up to sign wherever rotation is meaningful.
      for (int i = 0; i < 3; ++i) {
        if (!ind.i_r[i]) continue;
        const double dot = std::abs(
            d.attributes.rotation.col(i).dot(pose.rotation.col(i)));
        CHECK(dot > 1.0 - 1e-8);
      }
    }
  }
}

TEST_CASE("classify_center handles the three ranks and rejects paraboloids") {
  const CanonicalForm cs = qt::canonical_for(QuadricType::Sphere, {1, 1, 1});
  RigidTransform pose;
  pose.translation = {1, 2, 3};
  const QuadricMatrix qs = compose(cs, pose);
  auto sol = classify_center(qs.block33(), qs.l());
  REQUIRE(sol.has_value());
  CHECK(sol->center_class == CenterClass::Central);
  CHECK((sol->center - Eigen::Vector3d(1, 2, 3)).norm() < 1e-9);

  const QuadricMatrix qc =
      compose(qt::canonical_for(QuadricType::Cylinder, {0.5, 0.5, 0}),
              RigidTransform::identity());
  auto solc = classify_center(qc.block33(), qc.l());
  REQUIRE(solc.has_value());
  CHECK(solc->center_class == CenterClass::LinearCenter);
  CHECK(solc->center.norm() < 1e-12);

  // Plane z = 5.
  RigidTransform plane_pose;
  plane_pose.rotation = so3_exp(Eigen::Vector3d(0, M_PI / 2, 0));
  plane_pose.translation = {0, 0, 5};
  const QuadricMatrix qp =
      compose(qt::canonical_for(QuadricType::Plane, {0, 0, 0}), plane_pose);
  auto solp = classify_center(qp.block33(), qp.l());
  REQUIRE(solp.has_value());
  CHECK(solp->center_class == CenterClass::PlanarCenter);
  CHECK(std::abs(solp->center.z() - 5.0) < 1e-9);
  CHECK(std::abs(QuadricMatrix(qp).evaluate(solp->center)) < 1e-9);

  // Paraboloid z = x^2 + y^2 has no center.
  QuadricMatrix par;
  par.m = Eigen::Matrix4d::Zero();
  par.m(0, 0) = par.m(1, 1) = 1.0;
  par.m(2, 3) = par.m(3, 2) = -0.5;
  CHECK_FALSE(classify_center(par.block33(), par.l()).has_value());
}

TEST_CASE("taubin distance is zero on the surface and tracks plane offsets") {
  Rng rng = make_rng(7);
  const auto pts = qt::sample_sphere(rng, {0, 0, 0}, 1.0, 200);
  QuadricMatrix sphere;
  sphere.m = Eigen::Vector4d(1, 1, 1, -1).asDiagonal();
  CHECK(taubin_distance(pts, sphere) < 1e-12);

  // f = z: one on-plane anchor plus one point at distance d. The unit-space
  // scale divides every residual by the max centered norm.
  QuadricMatrix plane;
  plane.m(2, 3) = plane.m(3, 2) = 0.5;
  for (double d : {0.01, 0.1}) {
    std::vector<Eigen::Vector3d> pair{{1.0, 0, 0}, {-1.0, 0, d}};
    const Eigen::Vector3d c = (pair[0] + pair[1]) / 2;
    const double m = std::max((pair[0] - c).norm(), (pair[1] - c).norm());
    const double expected = 0.5 * d / m;  // mean of residuals {0, d}, unit space
    CHECK(taubin_distance(pair, plane) == Catch::Approx(expected).margin(1e-9));
  }
}

TEST_CASE("taubin distance ignores the proportional ambiguity") {
  Rng rng = make_rng(11);
  const auto pts = qt::sample_sphere(rng, {1, 2, 3}, 2.0, 100, 0.05);
  const QuadricMatrix q = compose(
      qt::canonical_for(QuadricType::Sphere, {2, 2, 2}),
      RigidTransform{Eigen::Matrix3d::Identity(), Eigen::Vector3d(1, 2, 3)});
  QuadricMatrix qa = q;
  qa.m *= 37.5;
  CHECK(taubin_distance(pts, q) ==
        Catch::Approx(taubin_distance(pts, qa)).epsilon(1e-12));
}
