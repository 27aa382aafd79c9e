#include "probeforge/graph.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <string>

#include "probeforge/errors.hpp"
#include "probeforge/rng.hpp"

namespace probeforge {

void SentenceGraph::validate() const {
  if (n_nodes == 0) throw GraphError("graph has no nodes");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const Edge& e = edges[i];
    const std::string where = "edge #" + std::to_string(i) + " (" + std::to_string(e.head) +
                              ", " + std::to_string(e.dependent) + ")";
    if (e.head >= n_nodes || e.dependent >= n_nodes) {
      throw GraphError(where + " out of range for " + std::to_string(n_nodes) + " nodes");
    }
    if (e.head == e.dependent) throw GraphError(where + " is a self-loop");
  }
}

NormalizedAdjacency::NormalizedAdjacency(Matrix values) : values_(std::move(values)) {
  if (values_.rows() != values_.cols()) {
    throw DimensionError("NormalizedAdjacency: not square " + values_.shape_string());
  }
}

NormalizedAdjacency NormalizedAdjacency::identity(std::size_t n) {
  return NormalizedAdjacency(Matrix::identity(n));
}

NormalizedAdjacency normalize(const SentenceGraph& g) {
  g.validate();
  const std::size_t n = g.n_nodes;
  Matrix a_hat = Matrix::identity(n);
  for (const Edge& e : g.edges) {
    a_hat(e.head, e.dependent) = 1.0;
    a_hat(e.dependent, e.head) = 1.0;
  }
  std::vector<double> inv_sqrt_deg(n);
  for (std::size_t i = 0; i < n; ++i) {
    double deg = 0.0;
    for (double v : a_hat.row(i)) deg += v;
    inv_sqrt_deg[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      a_hat(i, j) = a_hat(i, j) == 0.0 ? 0.0 : inv_sqrt_deg[i] * a_hat(i, j) * inv_sqrt_deg[j];
  return NormalizedAdjacency(std::move(a_hat));
}

SentenceGraph random_tree(std::uint32_t n, std::uint64_t seed) {
  SentenceGraph g{n, {}};
  if (n < 2) return g;
  Rng rng(seed);
  std::vector<std::uint32_t> code(n - 2);
  for (auto& c : code) c = static_cast<std::uint32_t>(rng.below(n));

  std::vector<std::uint32_t> degree(n, 1);
  for (auto c : code) ++degree[c];
  std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> leaves;
  for (std::uint32_t i = 0; i < n; ++i)
    if (degree[i] == 1) leaves.push(i);

  g.edges.reserve(n - 1);
  for (auto c : code) {
    const std::uint32_t leaf = leaves.top();
    leaves.pop();
    g.edges.push_back({c, leaf});
    if (--degree[c] == 1) leaves.push(c);
  }
  const std::uint32_t u = leaves.top();
  leaves.pop();
  const std::uint32_t v = leaves.top();
  g.edges.push_back({u, v});
  return g;
}

Matrix apply_propagation(const NormalizedAdjacency& adj, const Matrix& q) {
  if (adj.n() != q.rows()) {
    throw DimensionError("apply_propagation: adjacency (" + std::to_string(adj.n()) +
                         " nodes) vs features " + q.shape_string());
  }
  return matmul(adj.matrix(), q);
}

}  // namespace probeforge
