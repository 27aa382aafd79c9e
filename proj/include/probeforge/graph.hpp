#pragma once

#include <cstdint>
#include <vector>

#include "probeforge/numcore.hpp"

namespace probeforge {

struct Edge {
  std::uint32_t head = 0;
  std::uint32_t dependent = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Word-level dependency graph. Self-loops are never stored; normalization adds them.
struct SentenceGraph {
  std::uint32_t n_nodes = 0;
  std::vector<Edge> edges;

  // Throws GraphError naming the first offending edge.
  void validate() const;
};

/// D^-1/2 (A + I) D^-1/2 for the symmetrized adjacency A.
class NormalizedAdjacency {
 public:
  NormalizedAdjacency() = default;
  explicit NormalizedAdjacency(Matrix values);

  std::size_t n() const noexcept { return values_.rows(); }
  const Matrix& matrix() const noexcept { return values_; }

  static NormalizedAdjacency identity(std::size_t n);

 private:
  Matrix values_;
};

NormalizedAdjacency normalize(const SentenceGraph& g);

/// Uniform random labeled spanning tree on n nodes, decoded from a random
/// Pruefer sequence. Deterministic in seed.
SentenceGraph random_tree(std::uint32_t n, std::uint64_t seed);

/// adj * q.
Matrix apply_propagation(const NormalizedAdjacency& adj, const Matrix& q);

}  // namespace probeforge
