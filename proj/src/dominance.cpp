#include "kdenoise/dominance.hpp"

#include "kdenoise/error.hpp"
#include "kdenoise/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace kdenoise {

namespace {

void require_same_dim(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  if (mu.dim() != nu.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "measures live in different dimensions");
  }
}

}  // namespace

ConvexOrderVerdict is_convex_order(const DiscreteMeasure& mu_in, const DiscreteMeasure& nu_in,
                                   double feas_tol) {
  require_same_dim(mu_in, nu_in);
  // The order is invariant under a common affine map, so the LP runs on
  // coordinates centered at nu's barycenter and scaled into [-1, 1]; the
  // tolerance then means the same thing at every scale.
  const Vector shift = -barycenter(nu_in);
  const DiscreteMeasure nu_t = translate(nu_in, shift);
  const double extent = std::max(nu_t.points().cwiseAbs().maxCoeff(),
                                 translate(mu_in, shift).points().cwiseAbs().maxCoeff());
  const double unit = extent > 0.0 ? extent : 1.0;
  const DiscreteMeasure mu = dilate(translate(mu_in, shift), 1.0 / unit);
  const DiscreteMeasure nu = dilate(nu_t, 1.0 / unit);
  const auto m = static_cast<Eigen::Index>(mu.size());
  const auto n = static_cast<Eigen::Index>(nu.size());
  const auto d = static_cast<Eigen::Index>(mu.dim());
  const Eigen::Index vars = m * n;
  const Eigen::Index eqs = m + n + m * d;

  lp::Options opts;
  opts.feasibility_tol = feas_tol;
  const auto entries = static_cast<std::size_t>(eqs + 1) * static_cast<std::size_t>(vars + eqs + 1);
  if (entries > opts.max_tableau_entries) {
    throw Error(ErrorCode::kScaleLimit,
                "convex-order LP with " + std::to_string(m) + "x" + std::to_string(n) +
                    " coupling exceeds the dense simplex limit");
  }

  // Variable pi_ij lives at column i * n + j.
  Matrix A = Matrix::Zero(eqs, vars);
  Vector b = Vector::Zero(eqs);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) A(i, i * n + j) = 1.0;
    b(i) = mu.weights()(i);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) A(m + j, i * n + j) = 1.0;
    b(m + j) = nu.weights()(j);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::Index row = m + n + i * d + k;
      for (Eigen::Index j = 0; j < n; ++j) A(row, i * n + j) = nu.points()(j, k);
      b(row) = mu.weights()(i) * mu.points()(i, k);
    }
  }

  const lp::Result res = lp::find_feasible(A, b, opts);
  ConvexOrderVerdict verdict;
  if (res.status != lp::Status::kOptimal) {
    verdict.max_residual = res.infeasibility;
    return verdict;
  }
  Coupling pi{Matrix(m, n)};
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) pi.mass(i, j) = res.x(i * n + j);
  }
  const double equality_residual = (A * res.x - b).cwiseAbs().maxCoeff();
  verdict.max_residual =
      std::max(martingale_residual(pi, mu, nu), marginal_residual(pi, mu, nu));
  verdict.dominated = equality_residual <= feas_tol && verdict.max_residual <= feas_tol;
  verdict.max_residual = std::max(martingale_residual(pi, mu_in, nu_in),
                                  marginal_residual(pi, mu_in, nu_in));
  if (verdict.dominated) verdict.witness = std::move(pi);
  return verdict;
}

KdrVerdict kdr_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                     double slack_tol) {
  require_same_dim(mu, nu);
  const Vector shift = -barycenter(nu);
  const DiscreteMeasure mu_c = translate(mu, shift);
  const DiscreteMeasure nu_c = translate(nu, shift);
  const double m2_mu = second_moment(mu_c);
  const double m2_nu = second_moment(nu_c);

  TransportResult corr = max_correlation(mu_c, nu_c);
  const TransportResult w2 = w2_squared(mu_c, nu_c);

  KdrVerdict v;
  v.correlation_gap = corr.value - m2_mu;
  v.slack = m2_nu - m2_mu - w2.value;
  v.route_disagreement = std::abs(v.slack - 2.0 * v.correlation_gap);
  if (v.route_disagreement > 1e-8 * (1.0 + m2_mu + m2_nu)) {
    throw std::logic_error("kdr_check: correlation and Wasserstein routes disagree");
  }
  v.dominated = v.slack >= -slack_tol;
  v.witness = std::move(corr.coupling);
  return v;
}

Matrix conditional_barycenters(const Coupling& pi, const DiscreteMeasure& mu,
                               const DiscreteMeasure& nu) {
  if (pi.rows() != static_cast<Eigen::Index>(mu.size()) ||
      pi.cols() != static_cast<Eigen::Index>(nu.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "coupling shape does not match the measures");
  }
  require_same_dim(mu, nu);
  Matrix c = pi.mass * nu.points();
  const Vector rows = pi.mass.rowwise().sum();
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if (rows(i) > 0.0) {
      c.row(i) /= rows(i);
    } else {
      c.row(i) = mu.points().row(i);
    }
  }
  return c;
}

double martingale_residual(const Coupling& pi, const DiscreteMeasure& mu,
                           const DiscreteMeasure& nu) {
  const Matrix c = conditional_barycenters(pi, mu, nu);
  const Vector rows = pi.mass.rowwise().sum();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    if (rows(i) <= 0.0) continue;
    worst = std::max(worst, (c.row(i) - mu.points().row(i)).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::pair<DiscreteMeasure, Coupling> barycentric_recenter(const Coupling& pi,
                                                          const DiscreteMeasure& mu,
                                                          const DiscreteMeasure& nu) {
  const Matrix c = conditional_barycenters(pi, mu, nu);
  const Vector rows = pi.mass.rowwise().sum();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < rows.size(); ++i) {
    if (rows(i) > 0.0) keep.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  Matrix pts(k, c.cols());
  Vector w(k);
  Coupling out{Matrix(k, pi.cols())};
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index i = keep[static_cast<std::size_t>(r)];
    pts.row(r) = c.row(i);
    w(r) = rows(i);
    out.mass.row(r) = pi.mass.row(i);
  }
  // Row sums of pi carry the marginal up to rounding; renormalize.
  w /= w.sum();
  return {DiscreteMeasure(std::move(pts), std::move(w), 1e-9), std::move(out)};
}

bool is_monotone_support(const DiscreteMeasure& mu, double tol) {
  if (mu.dim() != 2) {
    throw Error(ErrorCode::kDimensionMismatch, "monotone support is defined for planar measures");
  }
  const Matrix& p = mu.points();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (mu.weights()(i) <= 0.0) continue;
    for (Eigen::Index j = i + 1; j < p.rows(); ++j) {
      if (mu.weights()(j) <= 0.0) continue;
      if ((p(j, 0) - p(i, 0)) * (p(j, 1) - p(i, 1)) < -tol) return false;
    }
  }
  return true;
}

}  // namespace kdenoise
