#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <unordered_map>
#include <vector>

#include "quadreg/common.hpp"

namespace quadreg {

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<int> labels;  // optional; aligned with points when present

  bool has_labels() const { return !labels.empty(); }
  std::size_t size() const { return points.size(); }
};

// Integer voxel key with a mixing hash, shared by the grid helpers below.
struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
  bool operator<(const VoxelKey& o) const {
    return std::tie(x, y, z) < std::tie(o.x, o.y, o.z);
  }
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.x, k.y, k.z}) {
      h ^= static_cast<std::uint64_t>(v);
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

inline VoxelKey voxel_key(const Eigen::Vector3d& p, double cell) {
  return {static_cast<std::int64_t>(std::floor(p.x() / cell)),
          static_cast<std::int64_t>(std::floor(p.y() / cell)),
          static_cast<std::int64_t>(std::floor(p.z() / cell))};
}

// Uniform hash grid over a point set; supports radius queries and BFS-style
// clustering at desk scale without a tree structure.
class VoxelGrid {
 public:
  VoxelGrid(const std::vector<Eigen::Vector3d>& points, double cell)
      : points_(points), cell_(cell) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      cells_[voxel_key(points[i], cell)].push_back(static_cast<int>(i));
    }
  }

  const std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash>& cells()
      const {
    return cells_;
  }

  // Indices within `radius` of q (inclusive).
  std::vector<int> radius_search(const Eigen::Vector3d& q, double radius) const {
    std::vector<int> out;
    const int span = static_cast<int>(std::ceil(radius / cell_));
    const VoxelKey c = voxel_key(q, cell_);
    const double r2 = radius * radius;
    for (int dx = -span; dx <= span; ++dx)
      for (int dy = -span; dy <= span; ++dy)
        for (int dz = -span; dz <= span; ++dz) {
          const auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (int idx : it->second) {
            if ((points_[idx] - q).squaredNorm() <= r2) out.push_back(idx);
          }
        }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  const std::vector<Eigen::Vector3d>& points_;
  double cell_;
  std::unordered_map<VoxelKey, std::vector<int>, VoxelKeyHash> cells_;
};

// Euclidean clustering: connected components under the distance threshold.
// Output clusters are sorted by size (largest first), deterministically.
inline std::vector<std::vector<int>> euclidean_clusters(
    const std::vector<Eigen::Vector3d>& points, double distance,
    int min_size) {
  VoxelGrid grid(points, distance);
  std::vector<char> visited(points.size(), 0);
  std::vector<std::vector<int>> clusters;
  for (std::size_t seed = 0; seed < points.size(); ++seed) {
    if (visited[seed]) continue;
    std::vector<int> cluster;
    std::queue<int> frontier;
    frontier.push(static_cast<int>(seed));
    visited[seed] = 1;
    while (!frontier.empty()) {
      const int cur = frontier.front();
      frontier.pop();
      cluster.push_back(cur);
      for (int nb : grid.radius_search(points[cur], distance)) {
        if (!visited[nb]) {
          visited[nb] = 1;
          frontier.push(nb);
        }
      }
    }
    if (static_cast<int>(cluster.size()) >= min_size) {
      std::sort(cluster.begin(), cluster.end());
      clusters.push_back(std::move(cluster));
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return clusters;
}

// One representative (centroid) per occupied voxel, ordered by voxel key.
inline std::vector<Eigen::Vector3d> voxel_downsample(
    const std::vector<Eigen::Vector3d>& points, double cell) {
  std::unordered_map<VoxelKey, std::pair<Eigen::Vector3d, int>, VoxelKeyHash>
      acc;
  for (const auto& p : points) {
    auto [it, inserted] =
        acc.try_emplace(voxel_key(p, cell), Eigen::Vector3d::Zero(), 0);
    it->second.first += p;
    it->second.second += 1;
  }
  std::vector<std::pair<VoxelKey, Eigen::Vector3d>> items;
  items.reserve(acc.size());
  for (const auto& [key, slot] : acc) {
    items.emplace_back(key, slot.first / slot.second);
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Eigen::Vector3d> out;
  out.reserve(items.size());
  for (auto& [key, c] : items) out.push_back(c);
  return out;
}

struct Moments {
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
};

inline Moments compute_moments(const std::vector<Eigen::Vector3d>& pts) {
  Moments m;
  if (pts.empty()) return m;
  for (const auto& p : pts) m.centroid += p;
  m.centroid /= static_cast<double>(pts.size());
  for (const auto& p : pts) {
    const Eigen::Vector3d d = p - m.centroid;
    m.covariance += d * d.transpose();
  }
  m.covariance /= static_cast<double>(pts.size());
  return m;
}

}  // namespace quadreg
