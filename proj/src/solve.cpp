#include "kdenoise/dominance.hpp"
#include "kdenoise/error.hpp"
#include "kdenoise/solvers.hpp"
#include "solver_common.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <variant>

namespace kdenoise {

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (max_outer_iter < 1) fail("max_outer_iter must be >= 1");
  if (!(step_size_x > 0.0) || !(step_size_u > 0.0)) fail("step sizes must be positive");
  const auto& m = multiplier_step_sizes;
  if (!(m.lambda1 > 0.0) || !(m.lambda1_i > 0.0) || !(m.lambda2 > 0.0) || !(m.lambda3 > 0.0)) {
    fail("multiplier step sizes must be positive");
  }
  if (!(mixing > 0.0) || mixing > 1.0) fail("mixing must lie in (0, 1]");
  if (!(convergence_tol > 0.0)) fail("convergence_tol must be positive");
  if (restarts < 1) fail("restarts must be >= 1");
  sinkhorn.validate();
}

namespace detail {

Matrix covariance(const DiscreteMeasure& centered) {
  const Matrix& p = centered.points();
  return p.transpose() * centered.weights().asDiagonal() * p;
}

Vector principal_direction(const DiscreteMeasure& centered) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(covariance(centered));
  Vector v = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0.0) v = -v;
  return v;
}

Matrix principal_line(const DiscreteMeasure& centered, std::size_t m) {
  const Vector v = principal_direction(centered);
  const Vector s = centered.points() * v;
  const double sd = std::sqrt(std::max(0.0, centered.weights().dot(s.cwiseProduct(s))));
  const double half = std::sqrt(3.0) * sd;
  Matrix x(static_cast<Eigen::Index>(m), v.size());
  for (std::size_t i = 0; i < m; ++i) {
    const double t = m == 1 ? 0.0 : -half + 2.0 * half * static_cast<double>(i) / (m - 1.0);
    x.row(static_cast<Eigen::Index>(i)) = t * v.transpose();
  }
  return x;
}

SinkhornConfig relative_sinkhorn(const SinkhornConfig& cfg, const Matrix& cost) {
  SinkhornConfig out = cfg;
  const double scale = cost.cwiseAbs().mean();
  out.epsilon = cfg.epsilon * (scale > 0.0 ? scale : 1.0);
  return out;
}

void finish_report(SolveReport& r, const DiscreteMeasure& mu_c, const DiscreteMeasure& nu_c,
                   const Vector& shift, const Coupling* own_coupling) {
  r.variance = variance(mu_c);
  const double m2_mu = second_moment(mu_c);
  const double m2_nu = second_moment(nu_c);
  if (mu_c.size() * nu_c.size() <= kExactMetricCells) {
    KdrVerdict v = kdr_check(mu_c, nu_c);
    r.kdr_slack = v.slack;
    r.w2_squared = m2_nu - m2_mu - v.slack;
    r.coupling = own_coupling ? *own_coupling : std::move(v.witness);
    r.transport = "exact";
  } else {
    const Matrix cost = squared_distance_cost(mu_c.points(), nu_c.points());
    SinkhornConfig cfg;
    cfg.epsilon = 1e-3;
    const TransportResult t = sinkhorn(mu_c, nu_c, cost, relative_sinkhorn(cfg, cost));
    r.w2_squared = t.value;
    r.kdr_slack = m2_nu - m2_mu - t.value;
    r.coupling = own_coupling ? *own_coupling : t.coupling;
    r.transport = "entropic";
  }
  r.domain_residuals["centering"] = barycenter(mu_c).cwiseAbs().maxCoeff();
  r.mu_star = translate(mu_c, shift);
}

void attach_convex_order(SolveReport& r, const DiscreteMeasure& mu_c,
                         const DiscreteMeasure& nu_c) {
  const std::size_t vars = mu_c.size() * nu_c.size();
  const std::size_t rows = mu_c.size() * (1 + mu_c.dim()) + nu_c.size();
  if (vars * rows > 4'000'000) return;
  try {
    const ConvexOrderVerdict v = is_convex_order(mu_c, nu_c);
    r.convex_order = v.dominated;
    r.domain_residuals["convex_order_residual"] = v.max_residual;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kScaleLimit) throw;
  }
}

}  // namespace detail

SolveReport solve_kdr(const DiscreteMeasure& nu, const DomainSpec& domain,
                      const SolverConfig& cfg) {
  validate_domain(domain, nu.dim());
  cfg.validate();
  if (const auto* d = std::get_if<BoundedLength>(&domain)) return solve_bounded_length(nu, *d, cfg);
  if (std::holds_alternative<LengthSdRatio>(domain) ||
      std::holds_alternative<BoundedCurvature>(domain)) {
    return solve_cone_alternating(nu, domain, cfg);
  }
  if (const auto* d = std::get_if<Subspace>(&domain)) {
    return solve_subspace(nu, d->subspace_dim).report;
  }
  if (const auto* d = std::get_if<DiscreteSupport>(&domain)) {
    return solve_discrete_support(nu, *d, cfg);
  }
  return solve_convex_order_penalty(nu, domain, cfg);
}

}  // namespace kdenoise
