#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <string>

namespace kdenoise {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Weighted point cloud in R^d. Row i of `points()` is atom i; atom order is
/// significant (curve domains read it as the traversal order) and is never
/// changed implicitly.
class DiscreteMeasure {
 public:
  static constexpr double kWeightSumTol = 1e-12;

  /// Validates and stores. Throws Error(kInvalidMeasure) when weights are
  /// negative, do not sum to one within `weight_sum_tol`, sizes disagree, or
  /// a coordinate is not finite.
  DiscreteMeasure(Matrix points, Vector weights,
                  double weight_sum_tol = kWeightSumTol);

  static DiscreteMeasure uniform(Matrix points);
  static DiscreteMeasure dirac(const Vector& at);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }

  const Matrix& points() const { return points_; }
  const Vector& weights() const { return weights_; }
  auto atom(std::size_t i) const { return points_.row(static_cast<Eigen::Index>(i)); }
  double weight(std::size_t i) const { return weights_(static_cast<Eigen::Index>(i)); }

 private:
  Matrix points_;
  Vector weights_;
};

Vector barycenter(const DiscreteMeasure& mu);
double second_moment(const DiscreteMeasure& mu);
double variance(const DiscreteMeasure& mu);

DiscreteMeasure translate(const DiscreteMeasure& mu, const Vector& k);
DiscreteMeasure dilate(const DiscreteMeasure& mu, double lambda);
/// Translate by minus the barycenter.
DiscreteMeasure center(const DiscreteMeasure& mu);

/// Drops zero-weight atoms and renormalizes the remainder exactly to one.
DiscreteMeasure normalize(const DiscreteMeasure& mu);

/// Polygonal length sum_i |x_{i+1} - x_i| in atom order.
double curve_length(const Matrix& points);

/// CSV with header `x1,...,xd,w`; one atom per row. Weights must sum to one
/// within 1e-9 on load; they are then rescaled to sum exactly to one.
DiscreteMeasure read_measure_csv(std::istream& in);
DiscreteMeasure load_measure_csv(const std::string& path);
void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu);
void save_measure_csv(const std::string& path, const DiscreteMeasure& mu);

}  // namespace kdenoise
