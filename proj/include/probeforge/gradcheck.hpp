#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "probeforge/numcore.hpp"

namespace probeforge {

/// Central differences of a scalar objective w.r.t. every entry of `x`.
/// `x` is perturbed in place and restored.
Matrix central_difference(const std::function<double()>& objective, Matrix& x, double h);

/// max |a - n| / max(max|a|, max|n|), with 0 when both are all zero.
double relative_error(const Matrix& analytic, const Matrix& numeric);

struct GradCheckEntry {
  std::string name;
  std::size_t instances = 0;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  double h = 1e-5;
  double tolerance = 1e-4;
  std::vector<GradCheckEntry> entries;
  double seconds = 0.0;

  bool passed() const;
};

/// Checks GCN, Message, MLP, KAN and both losses on random small instances
/// (n <= 5 nodes, d <= 4).
GradCheckReport run_gradcheck(std::uint64_t seed, std::size_t instances = 20, double h = 1e-5,
                              double tolerance = 1e-4);

}  // namespace probeforge
