#pragma once

#include <Eigen/Dense>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "quadreg/matching.hpp"
#include "quadreg/refine.hpp"
#include "quadreg/represent.hpp"
#include "quadreg/residual.hpp"

namespace quadreg {

// Least-squares rigid alignment of paired centers (cross-covariance SVD with
// reflection correction). Collinear or coincident sources are rejected.
inline RigidTransform svd_align(
    const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& pairs) {
  if (pairs.size() < 3) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "svd_align needs at least 3 pairs");
  }
  Eigen::Vector3d cx = Eigen::Vector3d::Zero(), cy = Eigen::Vector3d::Zero();
  for (const auto& [x, y] : pairs) {
    cx += x;
    cy += y;
  }
  cx /= static_cast<double>(pairs.size());
  cy /= static_cast<double>(pairs.size());

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const auto& [x, y] : pairs) {
    cross += (y - cy) * (x - cx).transpose();
    scatter += (x - cx) * (x - cx).transpose();
  }

  // Rank of the source scatter distinguishes planar (fine) from collinear or
  // coincident (ambiguous) configurations.
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(scatter);
  const Eigen::Vector3d lam = es.eigenvalues();  // ascending
  if (lam[2] < 1e-18 || lam[1] < 1e-12 * lam[2]) {
    throw Error(ErrorCode::DegenerateConfiguration,
                "centers are collinear or coincident");
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0) {
    d(2, 2) = -1.0;
  }
  RigidTransform t;
  t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
  t.translation = cy - t.rotation * cx;
  return t;
}

struct TransformCandidate {
  RigidTransform transform;
  int level = 0;
  int clique_size = 0;
  double validation_score = std::numeric_limits<double>::infinity();
  bool refine_converged = true;
};

// Dynamic covariance scaling: scaled squared error, bounded by phi.
inline double dcs_kernel(double r, double phi) {
  const double s = std::min(1.0, 2.0 * phi / (phi + r * r));
  return s * s * r * r;
}

// Scores one candidate: semantic nearest-neighbor center matches (greedy
// mutual, one-to-one, distance-capped), irregular-structure filtering,
// non-central augmentation, then the robustified mean quadric distance.
inline double validation_score(const SceneRepresentation& rx,
                               const SceneRepresentation& ry,
                               const RigidTransform& t, const Config& cfg) {
  std::map<int, std::vector<int>> x_by_label, y_by_label;
  const int nx = static_cast<int>(rx.total_size());
  const int ny = static_cast<int>(ry.total_size());
  for (int i = 0; i < nx; ++i) x_by_label[rx.at(i).label].push_back(i);
  for (int i = 0; i < ny; ++i) y_by_label[ry.at(i).label].push_back(i);

  std::vector<std::pair<int, int>> matches;
  for (const auto& [label, xs] : x_by_label) {
    const auto it = y_by_label.find(label);
    if (it == y_by_label.end()) continue;
    struct Entry {
      double dist;
      int x, y;
    };
    std::vector<Entry> entries;
    for (int xi : xs) {
      const Eigen::Vector3d moved = t.apply(rx.at(xi).t_f);
      for (int yi : it->second) {
        const double d = (moved - ry.at(yi).t_f).norm();
        if (d <= cfg.reg.snn_distance_cap) entries.push_back({d, xi, yi});
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.dist != b.dist) return a.dist < b.dist;
      if (a.x != b.x) return a.x < b.x;
      return a.y < b.y;
    });
    std::set<int> used_x, used_y;
    for (const auto& e : entries) {
      if (used_x.count(e.x) || used_y.count(e.y)) continue;
      used_x.insert(e.x);
      used_y.insert(e.y);
      matches.emplace_back(e.x, e.y);
    }
  }

  double sum = 0.0;
  int count = 0;
  for (const auto& [xi, yi] : matches) {
    const QuadricRecord& x = rx.at(xi);
    const QuadricRecord& y = ry.at(yi);
    if (is_key_structure(x) &&
        is_irregular(x, rx.ground_normal, cfg.reg.irregular_angle_deg)) {
      continue;
    }
    if (is_key_structure(y) &&
        is_irregular(y, ry.ground_normal, cfg.reg.irregular_angle_deg)) {
      continue;
    }
    auto add = [&](const QuadricRecord& src) {
      const QuadricResidual r = quadric_residual(src, y, t, 1.0);
      sum += dcs_kernel(r.e_r.norm() + r.e_t.norm(), cfg.reg.dcs_phi);
      ++count;
    };
    add(x);
    for (const auto& pseudo : augment_noncentral(x, cfg.repr.scale_floor)) {
      add(pseudo);
    }
  }
  if (count == 0) return std::numeric_limits<double>::infinity();
  return sum / count;
}

// Lowest mean robust distance wins; ties keep the lower level index.
inline const TransformCandidate* select_optimal(
    const SceneRepresentation& rx, const SceneRepresentation& ry,
    std::vector<TransformCandidate>& candidates, const Config& cfg) {
  if (candidates.empty()) return nullptr;
  const TransformCandidate* best = nullptr;
  for (auto& c : candidates) {
    c.validation_score = validation_score(rx, ry, c.transform, cfg);
    if (!best || c.validation_score < best->validation_score) {
      best = &c;
    }
  }
  if (best && std::isinf(best->validation_score)) return nullptr;
  return best;
}

struct RegistrationDiagnostics {
  int records_x = 0, augmented_x = 0;
  int records_y = 0, augmented_y = 0;
  int correspondences = 0;
  std::vector<int> clique_sizes;
  std::vector<TransformCandidate> candidates;
  int selected_level = -1;
  double represent_ms = 0.0, matching_ms = 0.0, estimation_ms = 0.0,
         total_ms = 0.0;
  std::string failure;
};

struct RegistrationOutcome {
  std::optional<RigidTransform> transform;
  RegistrationDiagnostics diag;

  bool success() const { return transform.has_value(); }
};

// Full pipeline on two already-built representations.
inline RegistrationOutcome register_representations(
    const SceneRepresentation& rx, const SceneRepresentation& ry,
    const Config& cfg) {
  RegistrationOutcome out;
  out.diag.records_x = static_cast<int>(rx.records.size());
  out.diag.augmented_x = static_cast<int>(rx.augmented.size());
  out.diag.records_y = static_cast<int>(ry.records.size());
  out.diag.augmented_y = static_cast<int>(ry.augmented.size());

  std::vector<Correspondence> correspondences;
  std::vector<CliqueResult> cliques;
  try {
    correspondences = init_correspondences(rx, ry, cfg);
    out.diag.correspondences = static_cast<int>(correspondences.size());
    cliques = prune(correspondences, rx, ry, cfg);
  } catch (const Error& e) {
    out.diag.failure = e.what();
    return out;
  }

  std::vector<TransformCandidate> candidates;
  for (const auto& clique : cliques) {
    out.diag.clique_sizes.push_back(static_cast<int>(clique.members.size()));
    std::vector<Correspondence> pairs;
    std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>> centers;
    for (int idx : clique.members) {
      pairs.push_back(correspondences[idx]);
      centers.emplace_back(rx.at(pairs.back().source_index).t_f,
                           ry.at(pairs.back().target_index).t_f);
    }
    RigidTransform t0;
    try {
      t0 = svd_align(centers);
    } catch (const Error&) {
      continue;  // degenerate clique configuration, drop this candidate
    }
    const RefineResult refined = refine(rx, ry, pairs, t0, cfg);
    TransformCandidate c;
    c.transform = refined.transform;
    c.level = clique.level;
    c.clique_size = static_cast<int>(clique.members.size());
    c.refine_converged = refined.converged;
    candidates.push_back(std::move(c));
  }

  const TransformCandidate* best = select_optimal(rx, ry, candidates, cfg);
  out.diag.candidates = candidates;
  if (!best) {
    out.diag.failure = candidates.empty()
                           ? "no transform candidate could be estimated"
                           : "no candidate produced validation matches";
    return out;
  }
  out.transform = best->transform;
  out.diag.selected_level = best->level;
  return out;
}

// Full pipeline from raw clouds, with stage timings.
inline RegistrationOutcome register_clouds(const PointCloud& cloud_x,
                                           const PointCloud& cloud_y,
                                           const Config& cfg) {
  using Clock = std::chrono::steady_clock;
  const auto ms = [](Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
  };

  const auto t0 = Clock::now();
  RegistrationOutcome out;
  SceneRepresentation rx, ry;
  try {
    rx = represent(cloud_x, cfg);
    ry = represent(cloud_y, cfg);
  } catch (const Error& e) {
    out.diag.failure = e.what();
    return out;
  }
  const auto t1 = Clock::now();
  out = register_representations(rx, ry, cfg);
  const auto t2 = Clock::now();
  out.diag.represent_ms = ms(t0, t1);
  out.diag.estimation_ms = ms(t1, t2);
  out.diag.total_ms = ms(t0, t2);
  return out;
}

}  // namespace quadreg
