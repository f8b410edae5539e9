#pragma once

#include "kdenoise/measure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace kdenoise {

/// Y = (Z, Z^2) + eps with Z uniform on [-1, 1] and eps ~ N(0, sigma^2 I).
struct Parabola {
  std::size_t n = 2000;
  double noise_sigma = 0.1;
};

/// Step from (0,0) to (1,0) to (1,1) to (2,1), sampled uniformly in arc
/// length, plus isotropic Gaussian noise.
struct StepCurve {
  std::size_t n = 300;
  double noise_sigma = 0.1;
};

/// Kernel image of the three collinear atoms {-1, 0, 1} x {0}: each atom is
/// split into x +- (cos t, sin t) with t = pi (1 - 1/(2(n+1))). nullopt gives
/// the limit t = pi (five atoms).
struct InstabilityKernel {
  std::optional<int> n_index = 1;
};

/// Y = L W + R with W ~ N(0, I_m) and R ~ N(0, sigma^2 I_d).
struct FactorModel {
  Matrix loadings;  // d x m
  double sigma = 0.5;
  std::size_t n = 20000;
};

struct FromCsv {
  std::string path;
};

using DatasetVariant = std::variant<Parabola, StepCurve, InstabilityKernel, FactorModel, FromCsv>;

struct DatasetSpec {
  DatasetVariant variant;
  std::uint64_t seed = 0;
};

/// Uniform-weight empirical measure (exact weights for InstabilityKernel),
/// deterministic given the seed.
DiscreteMeasure generate(const DatasetSpec& spec);

/// The loading matrix used by the factor-model experiment: d = 5, m = 2,
/// orthonormal columns scaled by sqrt(2) and 1.
Matrix default_factor_loadings();

}  // namespace kdenoise
