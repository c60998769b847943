#include <catch2/catch_amalgamated.hpp>

#include "quadreg/max_clique.hpp"
#include "support/helpers.hpp"

using namespace quadreg;

namespace {

CompatibilityGraph random_graph(Rng& rng, int n, double density) {
  CompatibilityGraph g;
  g.adjacency.assign(n, std::vector<char>(n, 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < density) g.adjacency[i][j] = g.adjacency[j][i] = 1;
    }
  }
  return g;
}

// Exhaustive maximum clique over all vertex subsets (n <= 20).
int brute_force_max_clique(const CompatibilityGraph& g) {
  const int n = g.size();
  int best = 0;
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    const int size = __builtin_popcount(mask);
    if (size <= best) continue;
    bool clique = true;
    for (int i = 0; i < n && clique; ++i) {
      if (!(mask & (1u << i))) continue;
      for (int j = i + 1; j < n && clique; ++j) {
        if (!(mask & (1u << j))) continue;
        if (!g.edge(i, j)) clique = false;
      }
    }
    if (clique) best = size;
  }
  return best;
}

}  // namespace

TEST_CASE("max_clique solves complete and empty graphs") {
  CompatibilityGraph k5;
  k5.adjacency.assign(5, std::vector<char>(5, 1));
  for (int i = 0; i < 5; ++i) k5.adjacency[i][i] = 0;
  const auto complete = max_clique(k5);
  CHECK(complete.members == std::vector<int>{0, 1, 2, 3, 4});

  CompatibilityGraph empty;
  empty.adjacency.assign(4, std::vector<char>(4, 0));
  const auto single = max_clique(empty);
  CHECK(single.members.size() == 1);
  CHECK(single.members[0] == 0);  // lexicographically smallest
}

TEST_CASE("max_clique matches brute force across densities") {
  Rng rng = make_rng(2024);
  std::uniform_int_distribution<int> size_dist(4, 20);
  const double densities[] = {0.2, 0.5, 0.8};
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size_dist(rng);
    const double density = densities[trial % 3];
    const CompatibilityGraph g = random_graph(rng, n, density);
    const int expected = brute_force_max_clique(g);
    const auto found = max_clique(g);
    INFO("trial " << trial << " n=" << n << " density=" << density);
    REQUIRE(static_cast<int>(found.members.size()) == expected);
    // Verify the members really form a clique.
    for (std::size_t i = 0; i < found.members.size(); ++i) {
      for (std::size_t j = i + 1; j < found.members.size(); ++j) {
        REQUIRE(g.edge(found.members[i], found.members[j]));
      }
    }
  }
}

TEST_CASE("max_clique honors a valid lower bound and survives an invalid one") {
  Rng rng = make_rng(77);
  const CompatibilityGraph g = random_graph(rng, 18, 0.5);
  const int expected = brute_force_max_clique(g);

  const auto seeded = max_clique(g, expected);  // bound equals the optimum
  CHECK(static_cast<int>(seeded.members.size()) == expected);

  const auto overshoot = max_clique(g, expected + 3);  // invalid bound
  CHECK(static_cast<int>(overshoot.members.size()) == expected);
}

TEST_CASE("max_clique is deterministic and lexicographically smallest") {
  Rng rng = make_rng(55);
  for (int trial = 0; trial < 20; ++trial) {
    const CompatibilityGraph g = random_graph(rng, 14, 0.6);
    const auto a = max_clique(g);
    const auto b = max_clique(g);
    REQUIRE(a.members == b.members);
    REQUIRE(std::is_sorted(a.members.begin(), a.members.end()));
  }
}

TEST_CASE("max_clique rejects oversized graphs") {
  CompatibilityGraph g;
  g.adjacency.assign(10, std::vector<char>(10, 0));
  CHECK_THROWS_AS(max_clique(g, 0, 5), Error);
}
