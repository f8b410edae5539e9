#pragma once

#include "kdenoise/measure.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <variant>

namespace kdenoise {

/// m-point curves of polygonal length at most `bound`; weights are free when
/// `optimize_weights`, otherwise fixed at 1/m.
struct BoundedLength {
  std::size_t m = 10;
  double bound = 4.0;
  bool optimize_weights = true;
};

/// Uniform m-point curves with length / standard deviation at most `bound`
/// (a cone). `bound` may be +inf.
struct LengthSdRatio {
  std::size_t m = 100;
  double bound = 6.0;
};

/// Uniform m-point curves with the total-curvature term penalized by
/// `curvature_penalty`. +inf requests zero curvature, i.e. collinear atoms.
struct BoundedCurvature {
  std::size_t m = 100;
  double curvature_penalty = 0.0;
};

/// Measures supported on a linear subspace of dimension `subspace_dim`.
struct Subspace {
  std::size_t subspace_dim = 1;
};

/// At most m atoms; optionally with prescribed weights.
struct DiscreteSupport {
  std::size_t m = 2;
  std::optional<Vector> fixed_weights;
};

/// Planar m-point measures whose support is a chain in the coordinatewise
/// order, enforced by a quadratic penalty of weight `penalty_weight`.
struct MonotonePenalty {
  std::size_t m = 3;
  double penalty_weight = 1e3;
};

using DomainSpec = std::variant<BoundedLength, LengthSdRatio, BoundedCurvature, Subspace,
                                DiscreteSupport, MonotonePenalty>;

/// Short identifier used in reports and on the command line:
/// bounded-length, ratio, curvature, subspace, discrete, monotone.
std::string domain_name(const DomainSpec& domain);

/// Throws Error(kInvalidDomain) when parameters are out of range for data
/// of dimension `dim`.
void validate_domain(const DomainSpec& domain, std::size_t dim);

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace kdenoise
