#pragma once

#include "kdenoise/measure.hpp"

#include <cstddef>

namespace kdenoise::lp {

enum class Status { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

const char* to_string(Status s);

struct Options {
  /// Smallest admissible pivot element.
  double pivot_tol = 1e-9;
  /// Reduced costs below -optimality_tol * (1 + |b|_1) enter the basis.
  double optimality_tol = 1e-12;
  /// Phase-1 optimum above this (relative to 1 + |b|_1) means infeasible.
  double feasibility_tol = 1e-9;
  std::size_t max_pivots = 1'000'000;
  /// Dense tableau size cap (rows * cols); larger problems are rejected
  /// with Error(kScaleLimit).
  std::size_t max_tableau_entries = 40'000'000;
};

struct Result {
  Status status = Status::kIterationLimit;
  Vector x;
  double objective = 0.0;
  /// Optimal phase-1 value: sum of artificial variables, 0 when feasible.
  double infeasibility = 0.0;
  std::size_t pivots = 0;
};

/// Minimizes c^T x subject to A x = b, x >= 0 with a dense two-phase tableau
/// simplex: Bland's smallest-index entering rule and a two-pass (Harris)
/// ratio test that prefers large pivots, with Bland's rule on ties.
Result solve_standard_form(const Matrix& A, const Vector& b, const Vector& c,
                           const Options& opts = {});

/// Phase 1 only: finds a feasible point of A x = b, x >= 0 if one exists.
Result find_feasible(const Matrix& A, const Vector& b, const Options& opts = {});

}  // namespace kdenoise::lp
