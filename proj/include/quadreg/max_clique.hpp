#pragma once

#include <algorithm>
#include <vector>

#include "quadreg/common.hpp"

namespace quadreg {

struct CompatibilityGraph {
  std::vector<std::vector<char>> adjacency;  // symmetric, zero diagonal
  double threshold = 0.0;

  int size() const { return static_cast<int>(adjacency.size()); }
  bool edge(int i, int j) const { return adjacency[i][j] != 0; }
};

struct CliqueResult {
  std::vector<int> members;  // sorted ascending
  int level = 0;
};

namespace detail {

// Greedy coloring upper bound for the candidate set (Tomita-style): vertices
// are grouped into independent color classes; a clique can take at most one
// vertex per class.
inline int color_bound(const CompatibilityGraph& g,
                       const std::vector<int>& candidates) {
  std::vector<std::vector<int>> classes;
  for (int v : candidates) {
    bool placed = false;
    for (auto& cls : classes) {
      bool independent = true;
      for (int u : cls) {
        if (g.edge(u, v)) {
          independent = false;
          break;
        }
      }
      if (independent) {
        cls.push_back(v);
        placed = true;
        break;
      }
    }
    if (!placed) classes.push_back({v});
  }
  return static_cast<int>(classes.size());
}

inline void max_clique_search(const CompatibilityGraph& g,
                              std::vector<int>& current,
                              const std::vector<int>& candidates,
                              int& best_size, std::vector<int>& best) {
  if (candidates.empty()) {
    if (static_cast<int>(current.size()) > best_size) {
      best_size = static_cast<int>(current.size());
      best = current;
    }
    return;
  }
  if (static_cast<int>(current.size()) + color_bound(g, candidates) <=
      best_size) {
    return;
  }
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (static_cast<int>(current.size() + candidates.size() - i) <= best_size) {
      return;
    }
    const int v = candidates[i];
    current.push_back(v);
    std::vector<int> next;
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (g.edge(v, candidates[j])) next.push_back(candidates[j]);
    }
    max_clique_search(g, current, next, best_size, best);
    current.pop_back();
  }
}

// First clique of exactly `target` vertices in ascending-index DFS order,
// which is the lexicographically smallest one.
inline bool lex_smallest_clique(const CompatibilityGraph& g,
                                std::vector<int>& current,
                                const std::vector<int>& candidates, int target,
                                std::vector<int>& out) {
  if (static_cast<int>(current.size()) == target) {
    out = current;
    return true;
  }
  const int need = target - static_cast<int>(current.size());
  if (static_cast<int>(candidates.size()) < need) return false;
  for (std::size_t i = 0; i + need <= candidates.size(); ++i) {
    const int v = candidates[i];
    current.push_back(v);
    std::vector<int> next;
    for (std::size_t j = i + 1; j < candidates.size(); ++j) {
      if (g.edge(v, candidates[j])) next.push_back(candidates[j]);
    }
    if (lex_smallest_clique(g, current, next, target, out)) return true;
    current.pop_back();
  }
  return false;
}

}  // namespace detail

// Exact maximum clique via branch-and-bound with a greedy coloring bound.
// `lower_bound` prunes branches that cannot beat a clique size already known
// to exist (from a sparser graph level); the result is the lexicographically
// smallest maximum clique. Singleton graphs yield a single vertex.
inline CliqueResult max_clique(const CompatibilityGraph& g, int lower_bound = 0,
                               int max_vertices = 5000) {
  const int n = g.size();
  if (n > max_vertices) {
    throw Error(ErrorCode::GraphTooLarge,
                "compatibility graph has " + std::to_string(n) +
                    " vertices (cap " + std::to_string(max_vertices) + ")");
  }
  CliqueResult result;
  if (n == 0) return result;

  // Degree-descending order speeds both the search and the coloring bound.
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::vector<int> degree(n, 0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) degree[i] += g.adjacency[i][j] ? 1 : 0;
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return degree[a] > degree[b]; });

  int best_size = std::max(lower_bound, 0);
  std::vector<int> best;
  std::vector<int> current;
  detail::max_clique_search(g, current, order, best_size, best);

  int target = best.empty() ? best_size : static_cast<int>(best.size());
  target = std::max(target, 1);

  std::vector<int> ascending(n);
  for (int i = 0; i < n; ++i) ascending[i] = i;
  current.clear();
  std::vector<int> lex;
  if (!detail::lex_smallest_clique(g, current, ascending, target, lex)) {
    // The caller's lower bound exceeded the true maximum; fall back to an
    // unseeded exact search.
    best_size = 0;
    best.clear();
    detail::max_clique_search(g, current, order, best_size, best);
    target = std::max(static_cast<int>(best.size()), 1);
    current.clear();
    detail::lex_smallest_clique(g, current, ascending, target, lex);
  }
  result.members = lex;
  return result;
}

}  // namespace quadreg
