#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>

#include "oracles.hpp"
#include "probeforge/errors.hpp"
#include "probeforge/graph.hpp"
#include "probeforge/rng.hpp"

using namespace probeforge;

namespace {

SentenceGraph from_pairs(std::uint32_t n,
                         const std::vector<std::pair<std::uint32_t, std::uint32_t>>& pairs) {
  SentenceGraph g{n, {}};
  for (auto [a, b] : pairs) g.edges.push_back({a, b});
  return g;
}

double max_diff(const Matrix& m, const oracle::Dense& o) {
  double worst = 0.0;
  for (std::size_t i = 0; i < o.size(); ++i)
    for (std::size_t j = 0; j < o.size(); ++j) worst = std::max(worst, std::abs(m(i, j) - o[i][j]));
  return worst;
}

bool is_spanning_tree(const SentenceGraph& g) {
  if (g.edges.size() + 1 != g.n_nodes) return false;
  std::vector<std::uint32_t> parent(g.n_nodes);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : g.edges) {
    const auto a = find(e.head), b = find(e.dependent);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

}  // namespace

TEST_SUITE("graph") {

TEST_CASE("normalize matches the dense construction for every tree up to five nodes") {
  std::size_t count = 0;
  for (std::uint32_t n = 1; n <= 5; ++n) {
    const auto trees = oracle::all_trees(n);
    // Cayley: n^(n-2) labeled trees.
    CHECK(trees.size() == static_cast<std::size_t>(std::llround(std::pow(n, n >= 2 ? n - 2.0 : 0.0))));
    for (const auto& t : trees) {
      CHECK(max_diff(normalize(from_pairs(n, t)).matrix(), oracle::normalized_adjacency(n, t)) <= 1e-12);
      ++count;
    }
  }
  CHECK(count == 1 + 1 + 3 + 16 + 125);
}

TEST_CASE("normalize matches the dense construction on random graphs up to twelve nodes") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::uint32_t>(1 + rng.below(12));
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = i + 1; j < n; ++j)
        if (rng.below(3) == 0) pairs.emplace_back(rng.below(2) ? i : j, rng.below(2) ? j : i);
    // drop accidental self-loops from the coin flips
    std::erase_if(pairs, [](auto p) { return p.first == p.second; });
    CHECK(max_diff(normalize(from_pairs(n, pairs)).matrix(), oracle::normalized_adjacency(n, pairs)) <= 1e-12);
  }
}

TEST_CASE("duplicate and reversed edges count once") {
  const auto a = normalize(from_pairs(3, {{0, 1}, {1, 0}, {0, 1}, {1, 2}}));
  const auto b = normalize(from_pairs(3, {{0, 1}, {1, 2}}));
  CHECK(a.matrix() == b.matrix());
}

TEST_CASE("an edgeless graph normalizes to the identity") {
  CHECK(normalize(SentenceGraph{4, {}}).matrix() == Matrix::identity(4));
}

TEST_CASE("the normalized operator is symmetric") {
  const auto adj = normalize(random_tree(9, 3)).matrix();
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) CHECK(adj(i, j) == adj(j, i));
}

TEST_CASE("random trees are spanning trees") {
  for (std::uint32_t n = 1; n <= 200; n += (n < 20 ? 1 : 13)) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const auto t = random_tree(n, seed);
      REQUIRE(is_spanning_tree(t));
      CHECK_NOTHROW(t.validate());
    }
  }
}

TEST_CASE("random trees are deterministic in the seed") {
  CHECK(random_tree(12, 99).edges == random_tree(12, 99).edges);
  CHECK(random_tree(12, 99).edges != random_tree(12, 100).edges);
  CHECK(random_tree(2, 5).edges == std::vector<Edge>{{0, 1}});
}

TEST_CASE("random trees cover all sixteen labeled trees on four nodes") {
  std::set<std::vector<std::pair<std::uint32_t, std::uint32_t>>> seen;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> key;
    for (const auto& e : random_tree(4, seed).edges)
      key.emplace_back(std::min(e.head, e.dependent), std::max(e.head, e.dependent));
    std::sort(key.begin(), key.end());
    seen.insert(key);
  }
  CHECK(seen.size() == 16);
}

TEST_CASE("invalid edges raise graph errors") {
  CHECK_THROWS_AS(SentenceGraph({3, {{0, 3}}}).validate(), GraphError);
  CHECK_THROWS_AS(SentenceGraph({3, {{1, 1}}}).validate(), GraphError);
  CHECK_THROWS_AS(normalize(SentenceGraph{3, {{2, 2}}}), GraphError);
}

TEST_CASE("propagation checks the row count") {
  const auto adj = normalize(random_tree(4, 1));
  CHECK_THROWS_AS(apply_propagation(adj, Matrix(5, 2)), DimensionError);
  CHECK(apply_propagation(NormalizedAdjacency::identity(3), Matrix{{1, 2}, {3, 4}, {5, 6}}) ==
        Matrix{{1, 2}, {3, 4}, {5, 6}});
}

}
