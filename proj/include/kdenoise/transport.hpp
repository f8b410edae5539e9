#pragma once

#include "kdenoise/measure.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>

namespace kdenoise {

/// Nonnegative m x n mass matrix whose row sums are the source weights and
/// column sums the target weights.
struct Coupling {
  Matrix mass;

  Eigen::Index rows() const { return mass.rows(); }
  Eigen::Index cols() const { return mass.cols(); }
};

/// Product coupling mu (x) nu.
Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Largest absolute deviation of the coupling's row/column sums from the
/// weights of mu/nu, or +inf on a shape mismatch.
double marginal_residual(const Coupling& pi, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu);

/// L1 violation of both marginals.
double marginal_l1_error(const Coupling& pi, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu);

/// <cost, pi>.
double coupling_cost(const Coupling& pi, const Matrix& cost);

/// Pairwise squared Euclidean distances |x_i - y_j|^2.
Matrix squared_distance_cost(const Matrix& x, const Matrix& y);

/// CSV `i,j,mass` listing the nonzero entries.
void write_coupling_csv(std::ostream& out, const Coupling& pi);

enum class TransportMethod { kExact, kEntropic };

struct SinkhornConfig {
  double epsilon = 1e-2;
  std::size_t max_iter = 100000;
  /// L1 marginal violation at which iteration stops (before rounding).
  double marginal_tol = 1e-6;
  bool use_epsilon_scaling = true;

  void validate() const;
};

struct TransportResult {
  double value = 0.0;
  Coupling coupling;
  TransportMethod method = TransportMethod::kExact;
  std::size_t iterations = 0;
  /// False when the entropic solver hit max_iter before reaching marginal_tol.
  bool converged = true;
  /// Marginal L1 violation before the rounding step (entropic only).
  double marginal_error_before_rounding = 0.0;
};

/// Minimizes <cost, pi> over couplings of mu and nu exactly (network simplex).
/// Zero-weight atoms are stripped before solving and reinserted as zero
/// rows/columns.
TransportResult exact_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const Matrix& cost);

/// Squared 2-Wasserstein distance.
TransportResult w2_squared(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Maximal correlation sup_pi int <x, y> dpi; `value` is that supremum.
TransportResult max_correlation(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// Log-domain Sinkhorn with optional epsilon scaling. The returned coupling
/// is rounded onto the exact marginals; `value` is <cost, rounded plan>.
TransportResult sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const Matrix& cost, const SinkhornConfig& cfg);

/// Warm-startable Sinkhorn state for repeated solves on slowly changing
/// costs (the outer loops of the curve solvers).
struct SinkhornWarmStart {
  Vector f;  // row potentials
  Vector g;  // column potentials
};

TransportResult sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const Matrix& cost, const SinkhornConfig& cfg,
                         SinkhornWarmStart* warm);

/// Projects a nonnegative plan onto the transport polytope of (a, b):
/// row/column rescaling followed by a rank-one residual correction.
Matrix round_to_marginals(const Matrix& plan, const Vector& a, const Vector& b);

}  // namespace kdenoise
