#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <set>
#include <vector>

#include "quadreg/config.hpp"
#include "quadreg/max_clique.hpp"
#include "quadreg/record.hpp"

namespace quadreg {

// A putative quadric pair. Indices address the combined record list of a
// SceneRepresentation (records first, then augmented points).
struct Correspondence {
  int source_index = 0;
  int target_index = 0;
  double similarity = 0.0;  // negated masked scale distance; 0 is best
  bool is_augmented = false;
};

// Negated scale distance over the axes that are non-degenerate for both
// records (fallback fits may give two records of one semantic class different
// quadric types; the shared mask is their intersection).
inline double quadric_similarity(const QuadricRecord& x,
                                 const QuadricRecord& y) {
  if (x.label != y.label) {
    throw Error(ErrorCode::LabelMismatch,
                "similarity requires matching semantic labels");
  }
  const Eigen::Array3i mask = x.i_s.min(y.i_s);
  double sq = 0.0;
  for (int i = 0; i < 3; ++i) {
    if (mask[i]) {
      const double d = x.s_f[i] - y.s_f[i];
      sq += d * d;
    }
  }
  return -std::sqrt(sq);
}

// Mutual top-K similarity matching per shared semantic type; augmented points
// are matched separately by descriptor distance (mutual nearest neighbor with
// a ratio test) and filtered to equal labels.
inline std::vector<Correspondence> init_correspondences(
    const SceneRepresentation& rx, const SceneRepresentation& ry,
    const Config& cfg) {
  const int k_s = cfg.matching.top_k_similar;
  std::vector<Correspondence> out;

  std::map<int, std::vector<int>> x_by_label, y_by_label;
  for (std::size_t i = 0; i < rx.records.size(); ++i) {
    x_by_label[rx.records[i].label].push_back(static_cast<int>(i));
  }
  for (std::size_t i = 0; i < ry.records.size(); ++i) {
    y_by_label[ry.records[i].label].push_back(static_cast<int>(i));
  }

  bool any_shared = false;
  for (const auto& [label, xs] : x_by_label) {
    const auto it = y_by_label.find(label);
    if (it == y_by_label.end()) continue;
    any_shared = true;
    const auto& ys = it->second;

    // Top-K lists in both directions; ties keep the smaller index.
    auto top_k = [&](const QuadricRecord& anchor, const std::vector<int>& pool,
                     const std::vector<QuadricRecord>& recs) {
      std::vector<std::pair<double, int>> scored;
      scored.reserve(pool.size());
      for (int idx : pool) {
        scored.emplace_back(quadric_similarity(anchor, recs[idx]), idx);
      }
      std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      if (static_cast<int>(scored.size()) > k_s) scored.resize(k_s);
      return scored;
    };

    std::set<std::pair<int, int>> y_nominates;
    for (int y : ys) {
      for (const auto& [sim, x] : top_k(ry.records[y], xs, rx.records)) {
        y_nominates.insert({x, y});
      }
    }
    for (int x : xs) {
      for (const auto& [sim, y] : top_k(rx.records[x], ys, ry.records)) {
        if (y_nominates.count({x, y})) {
          out.push_back({x, y, sim, false});
        }
      }
    }
  }

  // Augmented points: mutual nearest neighbor on L1 descriptor distance.
  if (!rx.augmented.empty() && !ry.augmented.empty()) {
    const auto l1 = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      return (a - b).cwiseAbs().sum();
    };
    const int nx = static_cast<int>(rx.augmented.size());
    const int ny = static_cast<int>(ry.augmented.size());
    auto nearest = [&](const Eigen::VectorXd& d,
                       const std::vector<QuadricRecord>& pool) {
      int best = -1;
      double d1 = std::numeric_limits<double>::max();
      double d2 = d1;
      for (std::size_t i = 0; i < pool.size(); ++i) {
        const double dist = l1(d, pool[i].descriptor);
        if (dist < d1) {
          d2 = d1;
          d1 = dist;
          best = static_cast<int>(i);
        } else if (dist < d2) {
          d2 = dist;
        }
      }
      return std::tuple{best, d1, d2};
    };
    for (int i = 0; i < nx; ++i) {
      const auto [j, d1, d2] = nearest(rx.augmented[i].descriptor, ry.augmented);
      if (j < 0) continue;
      if (d2 > 0 && d1 / d2 > cfg.matching.descriptor_ratio_test) continue;
      const auto [back, b1, b2] = nearest(ry.augmented[j].descriptor, rx.augmented);
      if (back != i) continue;
      if (rx.augmented[i].label != ry.augmented[j].label) continue;
      out.push_back({static_cast<int>(rx.records.size()) + i,
                     static_cast<int>(ry.records.size()) + j, 0.0, true});
      any_shared = true;
    }
  }

  if (!any_shared) {
    throw Error(ErrorCode::NoSharedSemantics,
                "representations share no semantic types");
  }
  return out;
}

// Translation/rotation-invariant consistency of two correspondences: the
// center-to-center length difference across the two clouds.
inline double invariant_distance(const Correspondence& a,
                                 const Correspondence& b,
                                 const SceneRepresentation& rx,
                                 const SceneRepresentation& ry) {
  const double dx = (rx.at(a.source_index).t_f - rx.at(b.source_index).t_f).norm();
  const double dy = (ry.at(a.target_index).t_f - ry.at(b.target_index).t_f).norm();
  return std::abs(dx - dy);
}

// One graph per threshold (ascending); edge sets are nested by construction.
inline std::vector<CompatibilityGraph> build_graphs(
    const std::vector<Correspondence>& correspondences,
    const SceneRepresentation& rx, const SceneRepresentation& ry,
    const std::vector<double>& thresholds) {
  if (thresholds.empty()) {
    throw Error(ErrorCode::InputError, "at least one threshold level required");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (thresholds[i] <= thresholds[i - 1]) {
      throw Error(ErrorCode::InputError, "thresholds must be strictly ascending");
    }
  }
  const int n = static_cast<int>(correspondences.size());
  Eigen::MatrixXd d(n, n);
  for (int i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = d(j, i) =
          invariant_distance(correspondences[i], correspondences[j], rx, ry);
    }
  }
  std::vector<CompatibilityGraph> graphs;
  graphs.reserve(thresholds.size());
  for (double t : thresholds) {
    CompatibilityGraph g;
    g.threshold = t;
    g.adjacency.assign(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (d(i, j) <= t) g.adjacency[i][j] = g.adjacency[j][i] = 1;
      }
    }
    graphs.push_back(std::move(g));
  }
  return graphs;
}

// Multi-level pruning: the maximum clique of each threshold level, each level
// seeding the next one's lower bound. Clique sizes are monotone by nesting.
inline std::vector<CliqueResult> prune(
    const std::vector<Correspondence>& correspondences,
    const SceneRepresentation& rx, const SceneRepresentation& ry,
    const Config& cfg) {
  if (correspondences.size() < 3) {
    throw Error(ErrorCode::CorrespondenceDegenerate,
                "need at least 3 correspondences, have " +
                    std::to_string(correspondences.size()));
  }
  const auto graphs =
      build_graphs(correspondences, rx, ry, cfg.matching.thresholds);
  std::vector<CliqueResult> cliques;
  int lower_bound = 0;
  for (std::size_t level = 0; level < graphs.size(); ++level) {
    CliqueResult c = max_clique(graphs[level], lower_bound,
                                cfg.matching.max_graph_vertices);
    c.level = static_cast<int>(level);
    lower_bound = static_cast<int>(c.members.size());
    cliques.push_back(std::move(c));
  }
  return cliques;
}

}  // namespace quadreg
