#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "quadreg/cloud.hpp"
#include "quadreg/config.hpp"

namespace quadreg {

enum class SegmentSource { Ground, Plane, Line, Object };

struct ElementSegment {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> indices;  // into the cloud given to the extractor
  int label = 0;
  SegmentSource source = SegmentSource::Object;
};

struct GroundResult {
  ElementSegment segment;
  Eigen::Vector3d normal;  // unit, oriented into the +z hemisphere
};

// Ground: RANSAC plane over the lowest height band, slope-limited, refined by
// PCA over its inliers. Returns nothing when no sufficiently supported
// near-horizontal plane exists.
inline std::optional<GroundResult> extract_ground(const PointCloud& cloud,
                                                  const Config& cfg, Rng& rng) {
  const auto& pts = cloud.points;
  if (pts.size() < 3) return std::nullopt;
  const auto& r = cfg.repr;

  std::vector<int> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return pts[a].z() < pts[b].z(); });
  const std::size_t band_size = std::max<std::size_t>(
      3, static_cast<std::size_t>(r.ground_band_fraction * pts.size()));
  std::vector<int> band(order.begin(), order.begin() + std::min(band_size, order.size()));

  const double cos_tilt = std::cos(r.ground_max_tilt_deg * M_PI / 180.0);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(band.size()) - 1);

  Eigen::Vector3d best_n = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d best_p = Eigen::Vector3d::Zero();
  std::size_t best_support = 0;
  for (int it = 0; it < r.ground_ransac_iterations; ++it) {
    const Eigen::Vector3d a = pts[band[pick(rng)]];
    const Eigen::Vector3d b = pts[band[pick(rng)]];
    const Eigen::Vector3d c = pts[band[pick(rng)]];
    Eigen::Vector3d n = (b - a).cross(c - a);
    const double norm = n.norm();
    if (norm < 1e-9) continue;
    n /= norm;
    if (n.z() < 0) n = -n;
    if (n.z() < cos_tilt) continue;  // not ground-like
    std::size_t support = 0;
    for (int idx : band) {
      if (std::abs(n.dot(pts[idx] - a)) <= r.ground_inlier_threshold) ++support;
    }
    if (support > best_support) {
      best_support = support;
      best_n = n;
      best_p = a;
    }
  }
  if (best_support <
      static_cast<std::size_t>(r.ground_min_support * band.size())) {
    return std::nullopt;
  }

  // PCA refinement on band inliers, then collect inliers over the full cloud
  // (the band is only a candidate pool; ground usually extends above it).
  std::vector<Eigen::Vector3d> inliers;
  for (int idx : band) {
    if (std::abs(best_n.dot(pts[idx] - best_p)) <= r.ground_inlier_threshold) {
      inliers.push_back(pts[idx]);
    }
  }
  const Moments m = compute_moments(inliers);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.covariance);
  Eigen::Vector3d n = es.eigenvectors().col(0);
  if (n.z() < 0) n = -n;

  GroundResult out;
  out.normal = n;
  out.segment.label = labels::kGround;
  out.segment.source = SegmentSource::Ground;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::abs(n.dot(pts[i] - m.centroid)) <= r.ground_inlier_threshold) {
      out.segment.points.push_back(pts[i]);
      out.segment.indices.push_back(static_cast<int>(i));
    }
  }
  return out;
}

// Planes: voxel-wise eigen analysis plus region growing over voxel adjacency
// with normal agreement and centroid co-planarity.
inline std::vector<ElementSegment> extract_planes(const PointCloud& cloud,
                                                  const Config& cfg) {
  const auto& pts = cloud.points;
  const auto& r = cfg.repr;
  VoxelGrid grid(pts, r.plane_voxel);

  struct PlanarVoxel {
    VoxelKey key;
    Eigen::Vector3d normal;
    Eigen::Vector3d centroid;
    std::vector<int> indices;
  };
  std::vector<PlanarVoxel> voxels;
  std::vector<std::pair<VoxelKey, std::vector<int>>> ordered;
  ordered.reserve(grid.cells().size());
  for (const auto& [key, idx] : grid.cells()) ordered.emplace_back(key, idx);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  for (const auto& [key, idx] : ordered) {
    if (static_cast<int>(idx.size()) < r.plane_min_voxel_points) continue;
    std::vector<Eigen::Vector3d> vp;
    vp.reserve(idx.size());
    for (int i : idx) vp.push_back(pts[i]);
    const Moments m = compute_moments(vp);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.covariance);
    const Eigen::Vector3d lam = es.eigenvalues();  // ascending
    if (lam[1] < 1e-12) continue;
    if (lam[0] / lam[1] >= r.plane_eigen_ratio) continue;
    voxels.push_back({key, es.eigenvectors().col(0), m.centroid, idx});
  }

  // Region growing over the 26-neighborhood.
  std::map<VoxelKey, int> voxel_index;
  for (std::size_t i = 0; i < voxels.size(); ++i) voxel_index[voxels[i].key] = static_cast<int>(i);
  const double cos_merge = std::cos(r.plane_merge_angle_deg * M_PI / 180.0);
  std::vector<int> component(voxels.size(), -1);
  int n_components = 0;
  for (std::size_t seed = 0; seed < voxels.size(); ++seed) {
    if (component[seed] >= 0) continue;
    const int comp = n_components++;
    std::vector<int> stack{static_cast<int>(seed)};
    component[seed] = comp;
    while (!stack.empty()) {
      const int cur = stack.back();
      stack.pop_back();
      const VoxelKey& k = voxels[cur].key;
      for (int dx = -1; dx <= 1; ++dx)
        for (int dy = -1; dy <= 1; ++dy)
          for (int dz = -1; dz <= 1; ++dz) {
            if (!dx && !dy && !dz) continue;
            const auto it = voxel_index.find({k.x + dx, k.y + dy, k.z + dz});
            if (it == voxel_index.end() || component[it->second] >= 0) continue;
            const PlanarVoxel& a = voxels[cur];
            const PlanarVoxel& b = voxels[it->second];
            if (std::abs(a.normal.dot(b.normal)) < cos_merge) continue;
            const Eigen::Vector3d mid_raw = a.normal.dot(b.normal) >= 0
                                                ? Eigen::Vector3d(a.normal + b.normal)
                                                : Eigen::Vector3d(a.normal - b.normal);
            const Eigen::Vector3d mid_n = mid_raw.normalized();
            if (std::abs(mid_n.dot(a.centroid - b.centroid)) >
                r.plane_merge_offset) {
              continue;
            }
            component[it->second] = comp;
            stack.push_back(it->second);
          }
    }
  }

  std::vector<ElementSegment> segments(n_components);
  for (std::size_t i = 0; i < voxels.size(); ++i) {
    auto& seg = segments[component[i]];
    for (int idx : voxels[i].indices) {
      seg.points.push_back(pts[idx]);
      seg.indices.push_back(idx);
    }
  }
  std::vector<ElementSegment> out;
  for (auto& seg : segments) {
    if (static_cast<int>(seg.points.size()) < r.min_plane_points) continue;
    seg.label = labels::kPlane;
    seg.source = SegmentSource::Plane;
    out.push_back(std::move(seg));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.points.size() > b.points.size();
  });
  if (static_cast<int>(out.size()) > r.max_extracted) out.resize(r.max_extracted);
  return out;
}

namespace detail {

struct LineFit {
  std::vector<int> inliers;  // into the cluster
  Eigen::Vector3d direction;
};

inline std::optional<LineFit> ransac_line(
    const std::vector<Eigen::Vector3d>& pts, const Config& cfg, Rng& rng) {
  const auto& r = cfg.repr;
  if (pts.size() < 2) return std::nullopt;
  std::uniform_int_distribution<int> pick(0, static_cast<int>(pts.size()) - 1);
  std::vector<int> best;
  Eigen::Vector3d best_dir = Eigen::Vector3d::UnitZ();
  for (int it = 0; it < r.line_ransac_iterations; ++it) {
    const Eigen::Vector3d a = pts[pick(rng)];
    const Eigen::Vector3d b = pts[pick(rng)];
    Eigen::Vector3d dir = b - a;
    if (dir.norm() < 1e-9) continue;
    dir.normalize();
    std::vector<int> inliers;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Eigen::Vector3d d = pts[i] - a;
      if ((d - dir * dir.dot(d)).norm() <= r.line_inlier_radius) {
        inliers.push_back(static_cast<int>(i));
      }
    }
    if (inliers.size() > best.size()) {
      best = std::move(inliers);
      best_dir = dir;
    }
  }
  if (best.size() <
      static_cast<std::size_t>(r.line_inlier_fraction * pts.size())) {
    return std::nullopt;
  }
  return LineFit{std::move(best), best_dir};
}

}  // namespace detail

// Lines: cluster the residual cloud, require elongation, then a RANSAC line
// fit with an inlier-fraction acceptance.
inline std::vector<ElementSegment> extract_lines(const PointCloud& cloud,
                                                 const Config& cfg, Rng& rng) {
  const auto& r = cfg.repr;
  const auto clusters = euclidean_clusters(cloud.points, r.cluster_distance,
                                           std::min(r.min_cluster_size, r.min_line_points));
  std::vector<ElementSegment> out;
  for (const auto& cluster : clusters) {
    if (static_cast<int>(cluster.size()) < r.min_line_points) continue;
    std::vector<Eigen::Vector3d> cp;
    cp.reserve(cluster.size());
    for (int i : cluster) cp.push_back(cloud.points[i]);
    const Moments m = compute_moments(cp);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m.covariance);
    const Eigen::Vector3d lam = es.eigenvalues();
    if (lam[1] > 1e-12 && lam[2] / lam[1] < r.line_elongation) continue;
    const auto fit = detail::ransac_line(cp, cfg, rng);
    if (!fit) continue;
    ElementSegment seg;
    seg.label = labels::kLine;
    seg.source = SegmentSource::Line;
    for (int local : fit->inliers) {
      seg.points.push_back(cp[local]);
      seg.indices.push_back(cluster[local]);
    }
    if (static_cast<int>(seg.points.size()) < r.min_line_points) continue;
    out.push_back(std::move(seg));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.points.size() > b.points.size();
  });
  if (static_cast<int>(out.size()) > r.max_extracted) out.resize(r.max_extracted);
  return out;
}

// Objects: per-semantic-class clustering when labels are present, otherwise
// the remaining clusters become generic objects.
inline std::vector<ElementSegment> extract_objects(const PointCloud& cloud,
                                                   const Config& cfg) {
  const auto& r = cfg.repr;
  std::vector<ElementSegment> out;

  auto cluster_into = [&](const std::vector<int>& subset, int label) {
    std::vector<Eigen::Vector3d> sub;
    sub.reserve(subset.size());
    for (int i : subset) sub.push_back(cloud.points[i]);
    for (const auto& cluster : euclidean_clusters(sub, r.cluster_distance,
                                                  r.min_object_points)) {
      ElementSegment seg;
      seg.label = label;
      seg.source = SegmentSource::Object;
      for (int local : cluster) {
        seg.points.push_back(sub[local]);
        seg.indices.push_back(subset[local]);
      }
      out.push_back(std::move(seg));
    }
  };

  if (cloud.has_labels()) {
    std::map<int, std::vector<int>> by_label;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      by_label[cloud.labels[i]].push_back(static_cast<int>(i));
    }
    for (const auto& [label, subset] : by_label) cluster_into(subset, label);
  } else {
    std::vector<int> all(cloud.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    cluster_into(all, labels::kObject);
  }

  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.points.size() > b.points.size();
  });
  if (static_cast<int>(out.size()) > r.max_extracted) out.resize(r.max_extracted);
  return out;
}

}  // namespace quadreg
