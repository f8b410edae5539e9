#include "kdenoise/transport.hpp"

#include "kdenoise/error.hpp"
#include "kdenoise/network_simplex.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

namespace kdenoise {

Coupling product_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return {mu.weights() * nu.weights().transpose()};
}

double marginal_residual(const Coupling& pi, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu) {
  if (pi.rows() != static_cast<Eigen::Index>(mu.size()) ||
      pi.cols() != static_cast<Eigen::Index>(nu.size())) {
    return std::numeric_limits<double>::infinity();
  }
  const double row = (pi.mass.rowwise().sum() - mu.weights()).cwiseAbs().maxCoeff();
  const double col = (pi.mass.colwise().sum().transpose() - nu.weights()).cwiseAbs().maxCoeff();
  return std::max(row, col);
}

double marginal_l1_error(const Coupling& pi, const DiscreteMeasure& mu,
                         const DiscreteMeasure& nu) {
  if (pi.rows() != static_cast<Eigen::Index>(mu.size()) ||
      pi.cols() != static_cast<Eigen::Index>(nu.size())) {
    return std::numeric_limits<double>::infinity();
  }
  return (pi.mass.rowwise().sum() - mu.weights()).cwiseAbs().sum() +
         (pi.mass.colwise().sum().transpose() - nu.weights()).cwiseAbs().sum();
}

double coupling_cost(const Coupling& pi, const Matrix& cost) {
  return (pi.mass.array() * cost.array()).sum();
}

Matrix squared_distance_cost(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "point sets live in different dimensions");
  }
  Matrix c(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      c(i, j) = (x.row(i) - y.row(j)).squaredNorm();
    }
  }
  return c;
}

void write_coupling_csv(std::ostream& out, const Coupling& pi) {
  out << "i,j,mass\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < pi.rows(); ++i) {
    for (Eigen::Index j = 0; j < pi.cols(); ++j) {
      if (pi.mass(i, j) != 0.0) out << i << ',' << j << ',' << pi.mass(i, j) << '\n';
    }
  }
}

void SinkhornConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidConfig, "sinkhorn epsilon must be positive");
  }
  if (max_iter < 1) throw Error(ErrorCode::kInvalidConfig, "sinkhorn max_iter must be >= 1");
  if (!(marginal_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "sinkhorn marginal_tol must be positive");
  }
}

namespace {

std::vector<Eigen::Index> positive_support(const Vector& w) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (w(i) > 0.0) idx.push_back(i);
  }
  return idx;
}

void check_pair(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const Matrix& cost) {
  if (cost.rows() != static_cast<Eigen::Index>(mu.size()) ||
      cost.cols() != static_cast<Eigen::Index>(nu.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix shape does not match the measures");
  }
  if (!cost.allFinite()) {
    throw Error(ErrorCode::kInvalidConfig, "cost matrix has non-finite entries");
  }
}

}  // namespace

TransportResult exact_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const Matrix& cost) {
  check_pair(mu, nu, cost);
  const auto rows = positive_support(mu.weights());
  const auto cols = positive_support(nu.weights());
  Vector a(static_cast<Eigen::Index>(rows.size()));
  Vector b(static_cast<Eigen::Index>(cols.size()));
  Matrix c(a.size(), b.size());
  for (std::size_t r = 0; r < rows.size(); ++r) a(static_cast<Eigen::Index>(r)) = mu.weights()(rows[r]);
  for (std::size_t s = 0; s < cols.size(); ++s) b(static_cast<Eigen::Index>(s)) = nu.weights()(cols[s]);
  // Equalize totals so the tree solution closes exactly.
  b *= a.sum() / b.sum();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < cols.size(); ++s) {
      c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = cost(rows[r], cols[s]);
    }
  }
  const NetworkSimplexResult ns = solve_transportation(a, b, c);
  TransportResult res;
  res.method = TransportMethod::kExact;
  res.iterations = ns.pivots;
  res.converged = ns.optimal;
  res.coupling.mass = Matrix::Zero(static_cast<Eigen::Index>(mu.size()),
                                   static_cast<Eigen::Index>(nu.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t s = 0; s < cols.size(); ++s) {
      res.coupling.mass(rows[r], cols[s]) =
          ns.flow(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s));
    }
  }
  res.value = coupling_cost(res.coupling, cost);
  return res;
}

TransportResult w2_squared(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  return exact_ot(mu, nu, squared_distance_cost(mu.points(), nu.points()));
}

TransportResult max_correlation(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "measures live in different dimensions");
  }
  const Matrix inner = mu.points() * nu.points().transpose();
  TransportResult res = exact_ot(mu, nu, -inner);
  res.value = coupling_cost(res.coupling, inner);
  return res;
}

}  // namespace kdenoise
