// Helpers shared by the solver translation units; not installed.
#pragma once

#include "kdenoise/measure.hpp"
#include "kdenoise/rng.hpp"
#include "kdenoise/solvers.hpp"
#include "kdenoise/transport.hpp"

#include <cstddef>

namespace kdenoise::detail {

/// Coupling problems up to this many cells use the exact kernel for report
/// metrics; larger ones fall back to Sinkhorn.
inline constexpr std::size_t kExactMetricCells = 4'000'000;

/// Weighted covariance of a centered measure.
Matrix covariance(const DiscreteMeasure& centered);

/// Unit leading eigenvector of the covariance, sign fixed so that its
/// largest-magnitude entry is positive.
Vector principal_direction(const DiscreteMeasure& centered);

/// m atoms evenly spaced along the first principal component, spanning
/// +-sqrt(3) standard deviations of the projected data.
Matrix principal_line(const DiscreteMeasure& centered, std::size_t m);

/// k-means++ seeding: m data atoms drawn with probability proportional to
/// weight times squared distance to the atoms already drawn.
Matrix kmeans_pp(const DiscreteMeasure& nu, std::size_t m, Rng& rng);

/// Copy of `cfg` with epsilon multiplied by the mean absolute cost entry.
SinkhornConfig relative_sinkhorn(const SinkhornConfig& cfg, const Matrix& cost);

/// Fills variance, W2^2, KDR slack, coupling (own coupling if given,
/// otherwise the maximal-correlation witness) and the centering residual,
/// and translates mu_star back by `shift`.
void finish_report(SolveReport& r, const DiscreteMeasure& mu_c, const DiscreteMeasure& nu_c,
                   const Vector& shift, const Coupling* own_coupling = nullptr);

/// Attaches is_convex_order(mu, nu) when the dense LP is small enough.
void attach_convex_order(SolveReport& r, const DiscreteMeasure& mu_c,
                         const DiscreteMeasure& nu_c);

}  // namespace kdenoise::detail
