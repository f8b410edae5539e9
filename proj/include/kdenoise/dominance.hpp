#pragma once

#include "kdenoise/measure.hpp"
#include "kdenoise/transport.hpp"

#include <optional>
#include <utility>

namespace kdenoise {

struct ConvexOrderVerdict {
  bool dominated = false;
  /// Martingale coupling of (mu, nu) when dominated.
  std::optional<Coupling> witness;
  /// With a witness: max of the conditional-mean defect sup-norm and the
  /// marginal defect. Without: the phase-1 infeasibility of the LP.
  double max_residual = 0.0;
};

/// Kantorovich dominance verdict. `slack` is the Wasserstein form
///   int|y|^2 dnu' - int|x|^2 dmu' - W2^2(mu', nu')
/// on the measures translated by -b_nu; it equals twice `correlation_gap`,
/// the supremum of int <x, y - x> dpi over couplings.
struct KdrVerdict {
  bool dominated = false;
  double slack = 0.0;
  double correlation_gap = 0.0;
  /// Maximal-correlation coupling of (mu', nu').
  Coupling witness;
  /// |slack - 2 * correlation_gap|: disagreement of the two routes.
  double route_disagreement = 0.0;
};

inline constexpr double kDefaultFeasTol = 1e-8;
inline constexpr double kDefaultSlackTol = 1e-9;

/// Strassen test: searches for a martingale coupling with a phase-1 simplex
/// on {pi >= 0, row sums u, column sums v, sum_j pi_ij y_j = u_i x_i}.
/// `feas_tol` applies after centering at nu's barycenter and scaling the
/// coordinates into [-1, 1]; `max_residual` is in the original units.
/// Throws Error(kScaleLimit) when the dense LP would be too large.
ConvexOrderVerdict is_convex_order(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   double feas_tol = kDefaultFeasTol);

/// Kantorovich dominance check computed both through the maximal
/// correlation and through W2^2; throws std::logic_error if the two routes
/// disagree by more than 1e-8 (relative to the second moments).
KdrVerdict kdr_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     double slack_tol = kDefaultSlackTol);

/// Sup-norm over atoms with positive mass of c_pi(x_i) - x_i, where c_pi is
/// the conditional barycenter of row i.
double martingale_residual(const Coupling& pi, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu);

/// Conditional barycenters c_pi(x_i) for each row with positive mass
/// (rows with zero mass yield the original atom).
Matrix conditional_barycenters(const Coupling& pi, const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu);

/// Pushes mu forward through the conditional barycentric map of pi. Returns
/// the recentered measure and the recentered (martingale) coupling; rows
/// with zero mass are dropped.
std::pair<DiscreteMeasure, Coupling> barycentric_recenter(const Coupling& pi,
                                                          const DiscreteMeasure& mu,
                                                          const DiscreteMeasure& nu);

/// True when every pair of support points of a planar measure satisfies
/// (y1 - x1)(y2 - x2) >= -tol.
bool is_monotone_support(const DiscreteMeasure& mu, double tol = 1e-12);

}  // namespace kdenoise
