#pragma once

#include "kdenoise/measure.hpp"

#include <cstddef>

namespace kdenoise {

struct NetworkSimplexOptions {
  /// Reduced costs below -pivot_tol * (1 + max|cost|) are eligible to enter.
  double pivot_tol = 1e-12;
  /// Consecutive degenerate pivots tolerated under Dantzig pricing before
  /// switching to Bland's rule for the rest of the solve.
  std::size_t degenerate_streak_limit = 0;  // 0 means 20 * (m + n)
  std::size_t max_pivots = 50'000'000;
};

struct NetworkSimplexResult {
  Matrix flow;
  double cost = 0.0;
  std::size_t pivots = 0;
  bool used_bland = false;
  bool optimal = false;
};

/// Minimum-cost transportation between `supply` (size m) and `demand`
/// (size n), both strictly positive with equal totals, via the primal network
/// simplex on the complete bipartite graph. Returns a vertex (tree) solution.
NetworkSimplexResult solve_transportation(const Vector& supply, const Vector& demand,
                                          const Matrix& cost,
                                          const NetworkSimplexOptions& opts = {});

}  // namespace kdenoise
