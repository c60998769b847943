#pragma once

#include <algorithm>
#include <vector>

#include "quadreg/cloud.hpp"
#include "quadreg/config.hpp"
#include "quadreg/descriptor.hpp"
#include "quadreg/extract.hpp"
#include "quadreg/fitting.hpp"
#include "quadreg/record.hpp"

namespace quadreg {

namespace detail {

// Target type, then the fallback chain, each gated by the taubin distance;
// point fits are the exempt last resort.
inline std::optional<StatisticalFit> fit_with_fallback(
    const ElementSegment& segment, QuadricType target, const Config& cfg) {
  std::optional<QuadricType> type = target;
  while (type) {
    if (auto fit = fit_statistical(segment.points, *type, cfg)) {
      if (*type == QuadricType::Point ||
          taubin_distance(segment.points, fit->q) <= cfg.repr.fit_gate) {
        return fit;
      }
    }
    type = fallback_type(*type);
  }
  if (auto fit = fit_statistical(segment.points, QuadricType::Point, cfg)) {
    return fit;
  }
  return std::nullopt;
}

}  // namespace detail

// Full scene-representation pipeline: extraction, typed statistical fitting
// with the surface-distance gate, record fusion, per-label top-K selection
// and sparse-scene point augmentation.
inline SceneRepresentation represent(const PointCloud& cloud,
                                     const Config& cfg) {
  if (cloud.points.empty()) {
    throw Error(ErrorCode::EmptyScene, "empty point cloud");
  }
  Rng rng = make_rng(cfg.seed);
  SceneRepresentation scene;

  std::vector<char> removed(cloud.size(), 0);
  std::vector<ElementSegment> segments;

  // Ground.
  if (auto ground = extract_ground(cloud, cfg, rng)) {
    scene.has_ground = true;
    scene.ground_normal = ground->normal;
    scene.diag.ground_found = true;
    scene.diag.ground_points = static_cast<int>(ground->segment.points.size());
    for (int idx : ground->segment.indices) removed[idx] = 1;
    segments.push_back(std::move(ground->segment));
  }

  auto remaining_cloud = [&](bool with_labels) {
    PointCloud rest;
    std::vector<int> map;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      if (removed[i]) continue;
      rest.points.push_back(cloud.points[i]);
      if (with_labels && cloud.has_labels()) {
        rest.labels.push_back(cloud.labels[i]);
      }
      map.push_back(static_cast<int>(i));
    }
    return std::pair{rest, map};
  };

  // Planes.
  {
    auto [rest, map] = remaining_cloud(false);
    for (auto& seg : extract_planes(rest, cfg)) {
      for (int& idx : seg.indices) idx = map[idx];
      for (int idx : seg.indices) removed[idx] = 1;
      ++scene.diag.plane_segments;
      segments.push_back(std::move(seg));
    }
  }

  // Lines.
  {
    auto [rest, map] = remaining_cloud(false);
    for (auto& seg : extract_lines(rest, cfg, rng)) {
      for (int& idx : seg.indices) idx = map[idx];
      for (int idx : seg.indices) removed[idx] = 1;
      ++scene.diag.line_segments;
      segments.push_back(std::move(seg));
    }
  }

  // Objects.
  {
    auto [rest, map] = remaining_cloud(true);
    for (auto& seg : extract_objects(rest, cfg)) {
      for (int& idx : seg.indices) idx = map[idx];
      ++scene.diag.object_segments;
      segments.push_back(std::move(seg));
    }
  }

  // Typed fitting and record fusion.
  std::vector<QuadricRecord> records;
  for (const auto& seg : segments) {
    const QuadricType target = assign_quadric_type(seg.label, seg.source);
    const auto fit = detail::fit_with_fallback(seg, target, cfg);
    if (!fit) {
      ++scene.diag.dropped_fits;
      continue;
    }
    if (auto rec = build_record(seg, *fit, cfg)) {
      records.push_back(std::move(*rec));
    } else {
      ++scene.diag.dropped_fits;
    }
  }

  scene.records = select_top_k(records, cfg.repr.top_k);

  // Augmentation for sparse scenes, with descriptors from the original cloud.
  scene.augmented = augment_points(segments, scene.records, cfg);
  if (!scene.augmented.empty()) {
    VoxelGrid grid(cloud.points, cfg.repr.descriptor_radius);
    for (auto& rec : scene.augmented) {
      const auto idx = grid.radius_search(rec.t_f, cfg.repr.descriptor_radius);
      std::vector<Eigen::Vector3d> nb;
      // Cap the neighborhood with a deterministic stride for speed.
      const std::size_t cap = 60;
      const std::size_t stride = std::max<std::size_t>(1, idx.size() / cap);
      for (std::size_t i = 0; i < idx.size(); i += stride) {
        nb.push_back(cloud.points[idx[i]]);
      }
      rec.descriptor = compute_descriptor(rec.t_f, nb);
    }
  }

  if (scene.records.empty() && scene.augmented.empty()) {
    throw Error(ErrorCode::EmptyScene, "no quadric records could be extracted");
  }
  return scene;
}

}  // namespace quadreg
