#include <catch2/catch_amalgamated.hpp>

#include "quadreg/fitting.hpp"
#include "quadreg/record.hpp"
#include "support/helpers.hpp"

using namespace quadreg;
namespace qt = quadreg::testing;

namespace {

std::vector<Eigen::Vector3d> gaussian_blob(Rng& rng, const Eigen::Vector3d& center,
                                           const Eigen::Vector3d& sigma,
                                           const Eigen::Matrix3d& axes, int n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector3d local(sigma.x() * g(rng), sigma.y() * g(rng),
                                sigma.z() * g(rng));
    pts.push_back(center + axes * local);
  }
  return pts;
}

std::vector<Eigen::Vector3d> plane_patch(const Eigen::Vector3d& origin,
                                         const Eigen::Vector3d& u,
                                         const Eigen::Vector3d& v, double su,
                                         double sv, int nu, int nv) {
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < nu; ++i) {
    for (int j = 0; j < nv; ++j) {
      const double a = su * (static_cast<double>(i) / (nu - 1) - 0.5);
      const double b = sv * (static_cast<double>(j) / (nv - 1) - 0.5);
      pts.push_back(origin + a * u + b * v);
    }
  }
  return pts;
}

}  // namespace

TEST_CASE("assign_quadric_type follows the semantic mapping") {
  CHECK(assign_quadric_type(labels::kGround, SegmentSource::Ground) ==
        QuadricType::Plane);
  CHECK(assign_quadric_type(labels::kPlane, SegmentSource::Plane) ==
        QuadricType::Plane);
  CHECK(assign_quadric_type(labels::kLine, SegmentSource::Line) ==
        QuadricType::Line);
  CHECK(assign_quadric_type(labels::kTrunk, SegmentSource::Object) ==
        QuadricType::EllipticCylinder);
  CHECK(assign_quadric_type(labels::kVegetation, SegmentSource::Object) ==
        QuadricType::Ellipsoid);
  CHECK(assign_quadric_type(999, SegmentSource::Object) ==
        QuadricType::Ellipsoid);
}

TEST_CASE("statistical ellipsoid fit recovers k-sigma axes") {
  Rng rng = make_rng(404);
  Config cfg;
  const Eigen::Vector3d sigma(2.0, 1.0, 0.5);
  const Eigen::Vector3d center(3.0, -2.0, 1.0);
  const auto pts =
      gaussian_blob(rng, center, sigma, Eigen::Matrix3d::Identity(), 10000);

  const auto fit = fit_statistical(pts, QuadricType::Ellipsoid, cfg);
  REQUIRE(fit.has_value());
  const Eigen::Vector3d expected(1.645 * 2.0, 1.645 * 1.0, 1.645 * 0.5);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(fit->scale[i] - expected[i]) / expected[i] < 0.03);
  }
  CHECK((fit->pose.translation - center).norm() < 0.05);

  // The composed quadric decomposes back to the same geometry.
  const Decomposition d = decompose(fit->q);
  CHECK(d.type == QuadricType::Ellipsoid);
  CHECK((d.attributes.center - fit->pose.translation).norm() < 1e-9);
}

TEST_CASE("statistical plane fit is exact on planar points") {
  Config cfg;
  const Eigen::Vector3d n = Eigen::Vector3d(1, 2, 0.5).normalized();
  Eigen::Vector3d u = n.unitOrthogonal();
  Eigen::Vector3d v = n.cross(u);
  const auto pts = plane_patch({1, 1, 1}, u, v, 8.0, 4.0, 30, 20);

  const auto fit = fit_statistical(pts, QuadricType::Plane, cfg);
  REQUIRE(fit.has_value());
  CHECK(taubin_distance(pts, fit->q) < 1e-6);
  // Descending pose: the normal is the smallest-sigma direction (last column).
  const Eigen::Vector3d fitted_normal = fit->pose.rotation.col(2);
  const double angle =
      std::acos(std::clamp(std::abs(fitted_normal.dot(n)), 0.0, 1.0));
  CHECK(angle < 0.5 * M_PI / 180.0);
}

TEST_CASE("fit_statistical reports degenerate targets") {
  Config cfg;
  const auto pts = plane_patch({0, 0, 0}, Eigen::Vector3d::UnitX(),
                               Eigen::Vector3d::UnitY(), 4.0, 4.0, 20, 20);
  CHECK_FALSE(fit_statistical(pts, QuadricType::Sphere, cfg).has_value());
  CHECK_FALSE(fit_statistical(pts, QuadricType::Ellipsoid, cfg).has_value());
  CHECK(fit_statistical(pts, QuadricType::Plane, cfg).has_value());
  CHECK(fallback_type(QuadricType::Ellipsoid) == QuadricType::EllipticCylinder);
  CHECK(fallback_type(QuadricType::EllipticCylinder) == QuadricType::Plane);
  CHECK(fallback_type(QuadricType::Plane) == QuadricType::Point);
  CHECK_FALSE(fallback_type(QuadricType::Point).has_value());
}

TEST_CASE("build_record fuses quadric and statistical attributes") {
  Rng rng = make_rng(7);
  Config cfg;

  SECTION("central sphere keeps the quadric center entirely") {
    const auto pts = qt::sample_sphere(rng, {5, 5, 1}, 1.5, 4000, 0.01);
    ElementSegment seg;
    seg.points = pts;
    seg.label = labels::kObject;
    seg.source = SegmentSource::Object;
    const auto fit = fit_statistical(pts, QuadricType::Ellipsoid, cfg);
    REQUIRE(fit.has_value());
    const auto rec = build_record(seg, *fit, cfg);
    REQUIRE(rec.has_value());
    CHECK((rec->i_t == Eigen::Array3i(1, 1, 1)).all());
    const Decomposition d = decompose(fit->q);
    CHECK((rec->t_f - d.attributes.center).norm() < 1e-12);
  }

  SECTION("plane takes statistical scale and center") {
    const Eigen::Vector3d n = Eigen::Vector3d::UnitZ();
    const auto pts = plane_patch({2, 3, 1.5}, Eigen::Vector3d::UnitX(),
                                 Eigen::Vector3d::UnitY(), 10.0, 4.0, 40, 16);
    ElementSegment seg;
    seg.points = pts;
    seg.label = labels::kPlane;
    seg.source = SegmentSource::Plane;
    const auto fit = fit_statistical(pts, QuadricType::Plane, cfg);
    REQUIRE(fit.has_value());
    const auto rec = build_record(seg, *fit, cfg);
    REQUIRE(rec.has_value());
    CHECK(rec->type == QuadricType::Plane);
    // I_t has zeros -> whole center comes from the centroid.
    CHECK((rec->t_f - fit->pose.translation).norm() < 1e-12);
    // I_s all zero -> scale fully statistical: in-plane extents on axes b, c.
    CHECK(rec->s_f[1] > 1.0);
    CHECK(rec->s_f[2] > 1.0);
    // Fused rotation column a is the plane normal.
    CHECK(std::abs(std::abs(rec->rotation().col(0).dot(n)) - 1.0) < 1e-9);
  }

  SECTION("fused record decomposes consistently with stored attributes") {
    const auto pts = gaussian_blob(rng, {1, 2, 3}, {1.2, 0.6, 0.3},
                                   qt::random_rotation(rng), 5000);
    ElementSegment seg;
    seg.points = pts;
    seg.label = labels::kVehicle;
    seg.source = SegmentSource::Object;
    const auto fit = fit_statistical(pts, QuadricType::Ellipsoid, cfg);
    REQUIRE(fit.has_value());
    const auto rec = build_record(seg, *fit, cfg);
    REQUIRE(rec.has_value());

    const Decomposition d = decompose(build_matrix(rec->q));
    for (int i = 0; i < 3; ++i) {
      if (rec->i_s[i]) {
        CHECK(std::abs(d.attributes.scale[i] - rec->s_f[i]) < 1e-6);
      }
      if (rec->i_r[i]) {
        CHECK(std::abs(std::abs(
                  d.attributes.rotation.col(i).dot(rec->rotation().col(i))) -
              1.0) < 1e-6);
      }
    }
    if (rec->i_t.minCoeff() == 1) {
      CHECK((d.attributes.center - rec->t_f).norm() < 1e-6);
    }
  }
}

TEST_CASE("record round-trips through from_parameters") {
  Rng rng = make_rng(31);
  Config cfg;
  const auto pts = qt::sample_sphere(rng, {0, 1, 2}, 0.8, 2000, 0.005);
  ElementSegment seg;
  seg.points = pts;
  seg.label = labels::kObject;
  seg.source = SegmentSource::Object;
  const auto fit = fit_statistical(pts, QuadricType::Ellipsoid, cfg);
  REQUIRE(fit.has_value());
  const auto rec = build_record(seg, *fit, cfg);
  REQUIRE(rec.has_value());

  const QuadricRecord back = QuadricRecord::from_parameters(
      rec->label, rec->q, rec->s_f, rec->eta_f, rec->t_f);
  CHECK(back.type == rec->type);
  CHECK((back.i_s == rec->i_s).all());
  CHECK((back.i_r == rec->i_r).all());
  CHECK((back.i_t == rec->i_t).all());
}

TEST_CASE("select_top_k keeps the largest per label") {
  Config cfg;
  auto line_record = [&](double length, int tag) {
    QuadricRecord r;
    r.label = labels::kLine;
    r.type = QuadricType::Line;
    r.s_f = {0.05, 0.05, length};
    r.t_f = {static_cast<double>(tag), 0, 0};
    return r;
  };
  std::vector<QuadricRecord> records{line_record(4.0, 0), line_record(2.0, 1)};
  const auto kept = select_top_k(records, 1);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].t_f.x() == 0.0);

  const auto all = select_top_k(records, 10);
  CHECK(all.size() == 2);
}

TEST_CASE("augment_points gates on the record count") {
  Config cfg;
  cfg.repr.augment_threshold = 3;

  ElementSegment seg;
  seg.label = labels::kPlane;
  seg.source = SegmentSource::Plane;
  seg.points = plane_patch({0, 0, 0}, Eigen::Vector3d::UnitX(),
                           Eigen::Vector3d::UnitY(), 6.0, 6.0, 25, 25);

  std::vector<QuadricRecord> many(3);
  CHECK(augment_points({seg}, many, cfg).empty());

  std::vector<QuadricRecord> few(2);
  const auto aug = augment_points({seg}, few, cfg);
  CHECK(!aug.empty());
  for (const auto& r : aug) {
    CHECK(r.type == QuadricType::Point);
    CHECK(r.is_augmented);
    CHECK((r.i_s == Eigen::Array3i(0, 0, 0)).all());
    CHECK((r.i_t == Eigen::Array3i(1, 1, 1)).all());
  }
}
