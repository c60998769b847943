#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "quadreg/cloud.hpp"
#include "quadreg/quadric.hpp"
#include "quadreg/se3.hpp"

namespace quadreg {

struct SyntheticSceneSpec {
  int planes = 12;
  int lines = 10;
  int cylinders = 8;
  int ellipsoids = 14;
  int spheres = 6;
  double extent = 60.0;          // square scene side length, meters
  double noise_sigma = 0.05;     // meters, applied to the source side
  double overlap = 1.0;          // fraction of primitives seen by both sides
  double yaw_range_deg = 45.0;   // ground-truth yaw range
  double max_translation = 20.0; // ground-truth translation bound
  double ground_spacing = 0.45;  // ground grid step
  double surface_density = 28.0; // points per square meter on primitive surfaces
  int min_primitive_points = 250;
  std::uint64_t seed = 0;
};

struct GroundTruthPrimitive {
  QuadricType type = QuadricType::Unclassified;
  int label = 0;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d scale = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  bool in_x = true;
  bool in_y = true;
};

struct SyntheticScene {
  PointCloud cloud_x;  // source (transformed, noisy side)
  PointCloud cloud_y;  // target (world frame)
  RigidTransform gt;   // maps cloud_x into the cloud_y frame
  std::vector<GroundTruthPrimitive> primitives;
  std::vector<int> membership_x;  // per-point primitive index, -1 for ground
  std::vector<int> membership_y;
};

namespace detail {

struct PlacedPrimitive {
  GroundTruthPrimitive info;
  std::vector<Eigen::Vector3d> surface;  // shared surface samples
};

inline void viewpoint_split(Rng& rng, double coverage, std::size_t n,
                            const std::vector<double>& azimuth,
                            std::vector<char>& keep_a,
                            std::vector<char>& keep_b) {
  keep_a.assign(n, 1);
  keep_b.assign(n, 1);
  if (coverage >= 0.999) return;
  std::uniform_real_distribution<double> u(0.0, 2 * M_PI);
  const double width = 2 * M_PI * coverage;
  const double start_a = u(rng);
  const double start_b = u(rng);
  auto inside = [&](double phi, double start) {
    double d = std::fmod(phi - start, 2 * M_PI);
    if (d < 0) d += 2 * M_PI;
    return d <= width;
  };
  for (std::size_t i = 0; i < n; ++i) {
    keep_a[i] = inside(azimuth[i], start_a) ? 1 : 0;
    keep_b[i] = inside(azimuth[i], start_b) ? 1 : 0;
  }
}

}  // namespace detail

// Places ground plus typed primitives, samples their surfaces, splits the
// samples into two viewpoint-dependent observations whose shared-primitive
// fraction follows `overlap`, and moves the source side by a random yaw +
// translation with additive noise. Fully determined by the seed.
inline SyntheticScene generate_scene(const SyntheticSceneSpec& spec) {
  if (spec.overlap <= 0.0 || spec.overlap > 1.0) {
    throw Error(ErrorCode::InputError, "overlap must be in (0, 1]");
  }
  Rng rng = make_rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SyntheticScene scene;

  // Ground truth transform: bounded yaw, bounded translation.
  {
    std::uniform_real_distribution<double> yaw(-spec.yaw_range_deg,
                                               spec.yaw_range_deg);
    const double angle = yaw(rng) * M_PI / 180.0;
    std::uniform_real_distribution<double> dir(0.0, 2 * M_PI);
    const double phi = dir(rng);
    const double mag = spec.max_translation * std::sqrt(unit(rng));
    scene.gt.rotation = so3_exp(Eigen::Vector3d(0, 0, angle));
    scene.gt.translation =
        Eigen::Vector3d(mag * std::cos(phi), mag * std::sin(phi),
                        0.4 * (unit(rng) - 0.5));
  }

  // Primitive placement with pairwise separation.
  std::vector<detail::PlacedPrimitive> placed;
  std::vector<std::pair<Eigen::Vector3d, double>> occupied;  // center, radius
  const double half = spec.extent / 2.0;
  auto try_place = [&](double radius, double margin) -> std::optional<Eigen::Vector3d> {
    for (int attempt = 0; attempt < 200; ++attempt) {
      Eigen::Vector3d c((2 * unit(rng) - 1) * (half - radius),
                        (2 * unit(rng) - 1) * (half - radius), 0.0);
      bool free = true;
      for (const auto& [oc, orad] : occupied) {
        if ((c - oc).head<2>().norm() < radius + orad + margin) {
          free = false;
          break;
        }
      }
      if (free) {
        occupied.emplace_back(c, radius);
        return c;
      }
    }
    return std::nullopt;
  };

  auto add_primitive = [&](GroundTruthPrimitive info,
                           std::vector<Eigen::Vector3d> surface) {
    detail::PlacedPrimitive p;
    p.info = info;
    p.surface = std::move(surface);
    placed.push_back(std::move(p));
  };

  // Walls (vertical planes).
  for (int i = 0; i < spec.planes; ++i) {
    const double width = 6.0 + 4.0 * unit(rng);
    const double height = 2.5 + 1.0 * unit(rng);
    const auto c = try_place(width / 2.0, 2.0);
    if (!c) continue;
    const double yaw = 2 * M_PI * unit(rng);
    const Eigen::Matrix3d r = so3_exp(Eigen::Vector3d(0, 0, yaw));
    const Eigen::Vector3d u = r.col(0);  // along the wall
    const Eigen::Vector3d n = r.col(1);  // horizontal normal
    const Eigen::Vector3d center = *c + Eigen::Vector3d(0, 0, height / 2.0);
    const int count = std::max<int>(spec.min_primitive_points,
                                    static_cast<int>(width * height *
                                                     spec.surface_density));
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      const double a = (unit(rng) - 0.5) * width;
      const double b = (unit(rng) - 0.5) * height;
      pts.push_back(center + a * u + b * Eigen::Vector3d::UnitZ());
    }
    GroundTruthPrimitive info;
    info.type = QuadricType::Plane;
    info.label = labels::kPlane;
    info.center = center;
    info.scale = {0.0, width / 2.0, height / 2.0};
    Eigen::Matrix3d rot;
    rot.col(0) = n;
    rot.col(1) = u;
    rot.col(2) = Eigen::Vector3d::UnitZ();
    info.rotation = rot;
    add_primitive(info, std::move(pts));
  }

  // Poles (vertical lines).
  for (int i = 0; i < spec.lines; ++i) {
    const auto c = try_place(0.3, 1.5);
    if (!c) continue;
    const double height = 3.0 + 2.0 * unit(rng);
    const int count = std::max(120, spec.min_primitive_points / 2);
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      const double phi = 2 * M_PI * unit(rng);
      pts.push_back(*c + Eigen::Vector3d(0.03 * std::cos(phi),
                                         0.03 * std::sin(phi),
                                         height * unit(rng)));
    }
    GroundTruthPrimitive info;
    info.type = QuadricType::Line;
    info.label = labels::kLine;
    info.center = *c + Eigen::Vector3d(0, 0, height / 2.0);
    info.scale = {0.0, 0.0, height / 2.0};
    add_primitive(info, std::move(pts));
  }

  // Cylinders (trunk-like).
  for (int i = 0; i < spec.cylinders; ++i) {
    const double radius = 0.3 + 0.25 * unit(rng);
    const auto c = try_place(radius, 1.5);
    if (!c) continue;
    const double height = 2.0 + 1.5 * unit(rng);
    const double area = 2 * M_PI * radius * height;
    const int count = std::max<int>(spec.min_primitive_points,
                                    static_cast<int>(area * spec.surface_density));
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      const double phi = 2 * M_PI * unit(rng);
      pts.push_back(*c + Eigen::Vector3d(radius * std::cos(phi),
                                         radius * std::sin(phi),
                                         height * unit(rng)));
    }
    GroundTruthPrimitive info;
    info.type = QuadricType::Cylinder;
    info.label = labels::kTrunk;
    info.center = *c + Eigen::Vector3d(0, 0, height / 2.0);
    info.scale = {radius, radius, height / 2.0};
    add_primitive(info, std::move(pts));
  }

  // Ellipsoids (vehicle/vegetation-like blobs).
  for (int i = 0; i < spec.ellipsoids; ++i) {
    const Eigen::Vector3d semi(1.2 + 1.0 * unit(rng), 0.8 + 0.6 * unit(rng),
                               0.5 + 0.5 * unit(rng));
    const auto c = try_place(semi.x(), 1.5);
    if (!c) continue;
    const double yaw = 2 * M_PI * unit(rng);
    const Eigen::Matrix3d r = so3_exp(Eigen::Vector3d(0, 0, yaw));
    const Eigen::Vector3d center = *c + Eigen::Vector3d(0, 0, semi.z() + 0.3);
    const int count = spec.min_primitive_points +
                      static_cast<int>(spec.surface_density * 4 * semi.x());
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      Eigen::Vector3d d(gauss(rng), gauss(rng), gauss(rng));
      d.normalize();
      pts.push_back(center + r * (semi.asDiagonal() * d));
    }
    GroundTruthPrimitive info;
    info.type = QuadricType::Ellipsoid;
    info.label = labels::kVehicle;
    info.center = center;
    info.scale = semi;
    info.rotation = r;
    add_primitive(info, std::move(pts));
  }

  // Spheres.
  for (int i = 0; i < spec.spheres; ++i) {
    const double radius = 0.5 + 0.7 * unit(rng);
    const auto c = try_place(radius, 1.5);
    if (!c) continue;
    const Eigen::Vector3d center = *c + Eigen::Vector3d(0, 0, radius + 0.3);
    const int count = spec.min_primitive_points;
    std::vector<Eigen::Vector3d> pts;
    pts.reserve(count);
    for (int k = 0; k < count; ++k) {
      Eigen::Vector3d d(gauss(rng), gauss(rng), gauss(rng));
      d.normalize();
      pts.push_back(center + radius * d);
    }
    GroundTruthPrimitive info;
    info.type = QuadricType::Sphere;
    info.label = labels::kVegetation;
    info.center = center;
    info.scale = Eigen::Vector3d::Constant(radius);
    add_primitive(info, std::move(pts));
  }

  // Membership split: shared with probability `overlap`, otherwise one side.
  for (auto& p : placed) {
    if (spec.overlap >= 1.0 || unit(rng) < spec.overlap) {
      p.info.in_x = p.info.in_y = true;
    } else if (unit(rng) < 0.5) {
      p.info.in_x = true;
      p.info.in_y = false;
    } else {
      p.info.in_x = false;
      p.info.in_y = true;
    }
  }

  // Assemble world-frame observations.
  std::vector<Eigen::Vector3d> world_x, world_y;
  std::vector<int> member_x, member_y;
  std::vector<int> label_x, label_y;

  // Ground grid (always shared).
  for (double x = -half; x <= half; x += spec.ground_spacing) {
    for (double y = -half; y <= half; y += spec.ground_spacing) {
      const Eigen::Vector3d p(x + 0.1 * (unit(rng) - 0.5),
                              y + 0.1 * (unit(rng) - 0.5), 0.0);
      world_x.push_back(p);
      member_x.push_back(-1);
      label_x.push_back(labels::kGround);
      world_y.push_back(p);
      member_y.push_back(-1);
      label_y.push_back(labels::kGround);
    }
  }

  const double coverage = 0.5 + 0.5 * spec.overlap;
  for (std::size_t pi = 0; pi < placed.size(); ++pi) {
    auto& p = placed[pi];
    scene.primitives.push_back(p.info);
    std::vector<double> azimuth(p.surface.size());
    for (std::size_t k = 0; k < p.surface.size(); ++k) {
      const Eigen::Vector3d d = p.surface[k] - p.info.center;
      azimuth[k] = std::atan2(d.y(), d.x());
    }
    std::vector<char> keep_a, keep_b;
    detail::viewpoint_split(rng, coverage, p.surface.size(), azimuth, keep_a,
                            keep_b);
    for (std::size_t k = 0; k < p.surface.size(); ++k) {
      if (p.info.in_x && keep_a[k]) {
        world_x.push_back(p.surface[k]);
        member_x.push_back(static_cast<int>(pi));
        label_x.push_back(p.info.label);
      }
      if (p.info.in_y && keep_b[k]) {
        world_y.push_back(p.surface[k]);
        member_y.push_back(static_cast<int>(pi));
        label_y.push_back(p.info.label);
      }
    }
  }

  // Target stays in the world frame; the source is pulled back through the
  // ground truth and perturbed by noise.
  scene.cloud_y.points = std::move(world_y);
  scene.cloud_y.labels = std::move(label_y);
  scene.membership_y = std::move(member_y);

  const RigidTransform inv = scene.gt.inverse();
  scene.cloud_x.points.reserve(world_x.size());
  for (const auto& p : world_x) {
    Eigen::Vector3d q = inv.apply(p);
    if (spec.noise_sigma > 0) {
      q += spec.noise_sigma *
           Eigen::Vector3d(gauss(rng), gauss(rng), gauss(rng));
    }
    scene.cloud_x.points.push_back(q);
  }
  scene.cloud_x.labels = std::move(label_x);
  scene.membership_x = std::move(member_x);
  return scene;
}

}  // namespace quadreg
