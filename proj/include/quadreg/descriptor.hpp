#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <span>
#include <vector>

#include "quadreg/cloud.hpp"

namespace quadreg {

constexpr int kDescriptorBins = 33;  // 3 pair features x 11 bins

namespace detail {

// Normal of member i from its k nearest neighbors inside the neighborhood,
// oriented away from the neighborhood centroid (geometric, so the descriptor
// stays rigid-motion invariant).
inline Eigen::Vector3d local_normal(std::span<const Eigen::Vector3d> pts,
                                    int i, const Eigen::Vector3d& centroid) {
  constexpr int kNeighbors = 8;
  std::vector<std::pair<double, int>> dist;
  dist.reserve(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) {
    dist.emplace_back((pts[j] - pts[i]).squaredNorm(), static_cast<int>(j));
  }
  const std::size_t take = std::min<std::size_t>(kNeighbors + 1, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + take, dist.end());

  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  for (std::size_t j = 0; j < take; ++j) c += pts[dist[j].second];
  c /= static_cast<double>(take);
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (std::size_t j = 0; j < take; ++j) {
    const Eigen::Vector3d d = pts[dist[j].second] - c;
    cov += d * d.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(cov);
  Eigen::Vector3d n = es.eigenvectors().col(0);
  const Eigen::Vector3d outward = pts[i] - centroid;
  if (std::abs(n.dot(outward)) > 1e-9) {
    if (n.dot(outward) < 0) n = -n;
  } else if (n.z() < 0) {
    n = -n;
  }
  return n;
}

inline void accumulate_spfh(const Eigen::Vector3d& p, const Eigen::Vector3d& np,
                            const Eigen::Vector3d& q, const Eigen::Vector3d& nq,
                            Eigen::VectorXd& hist) {
  Eigen::Vector3d d = q - p;
  const double dist = d.norm();
  if (dist < 1e-12) return;
  d /= dist;
  // Darboux frame at the source point.
  const Eigen::Vector3d u = np;
  Eigen::Vector3d v = d.cross(u);
  const double vn = v.norm();
  if (vn < 1e-9) return;
  v /= vn;
  const Eigen::Vector3d w = u.cross(v);

  const double alpha = v.dot(nq);                       // [-1, 1]
  const double phi = u.dot(d);                          // [-1, 1]
  const double theta = std::atan2(w.dot(nq), u.dot(nq));  // [-pi, pi]

  auto bin = [](double x, double lo, double hi) {
    int b = static_cast<int>(11.0 * (x - lo) / (hi - lo));
    return std::clamp(b, 0, 10);
  };
  hist[bin(alpha, -1.0, 1.0)] += 1.0;
  hist[11 + bin(phi, -1.0, 1.0)] += 1.0;
  hist[22 + bin(theta, -M_PI, M_PI)] += 1.0;
}

}  // namespace detail

// Fast point feature histogram of the neighborhood around `point` (which the
// caller places first or anywhere in `neighborhood`; only geometry is used).
// L1-normalized. Fewer than 5 usable neighbors yields the flat histogram and
// sets `flagged`.
inline Eigen::VectorXd compute_descriptor(
    const Eigen::Vector3d& point, std::span<const Eigen::Vector3d> neighborhood,
    bool* flagged = nullptr) {
  if (flagged) *flagged = false;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(kDescriptorBins);
  if (neighborhood.size() < 5) {
    if (flagged) *flagged = true;
    out.setConstant(1.0 / kDescriptorBins);
    return out;
  }

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& p : neighborhood) centroid += p;
  centroid /= static_cast<double>(neighborhood.size());

  std::vector<Eigen::Vector3d> normals(neighborhood.size());
  for (std::size_t i = 0; i < neighborhood.size(); ++i) {
    normals[i] = detail::local_normal(neighborhood, static_cast<int>(i), centroid);
  }

  // Nearest member stands in for the query point itself.
  int self = 0;
  double best = std::numeric_limits<double>::max();
  for (std::size_t i = 0; i < neighborhood.size(); ++i) {
    const double d2 = (neighborhood[i] - point).squaredNorm();
    if (d2 < best) {
      best = d2;
      self = static_cast<int>(i);
    }
  }

  auto spfh = [&](int center) {
    Eigen::VectorXd h = Eigen::VectorXd::Zero(kDescriptorBins);
    for (std::size_t j = 0; j < neighborhood.size(); ++j) {
      if (static_cast<int>(j) == center) continue;
      detail::accumulate_spfh(neighborhood[center], normals[center],
                              neighborhood[j], normals[j], h);
    }
    return h;
  };

  out = spfh(self);
  double weight_count = 0.0;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(kDescriptorBins);
  for (std::size_t j = 0; j < neighborhood.size(); ++j) {
    if (static_cast<int>(j) == self) continue;
    const double w = (neighborhood[j] - neighborhood[self]).norm();
    if (w < 1e-12) continue;
    acc += spfh(static_cast<int>(j)) / w;
    weight_count += 1.0;
  }
  if (weight_count > 0) out += acc / weight_count;

  const double sum = out.sum();
  if (sum < 1e-12) {
    if (flagged) *flagged = true;
    out.setConstant(1.0 / kDescriptorBins);
    return out;
  }
  return out / sum;
}

}  // namespace quadreg
