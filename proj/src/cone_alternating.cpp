#include "kdenoise/error.hpp"
#include "kdenoise/solvers.hpp"
#include "solver_common.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <variant>

namespace kdenoise {

namespace {

constexpr double kRatioTol = 1e-9;

// Rows centered and scaled so that (1/m) sum |x_i|^2 = 1.
Matrix unit_variance_rows(const Matrix& x) {
  Matrix c = x.rowwise() - x.colwise().mean();
  const double ms = c.squaredNorm() / static_cast<double>(c.rows());
  if (!(ms > 0.0)) return c;
  return c / std::sqrt(ms);
}

// Hard collinear step: the best unit-variance configuration on a line.
Matrix collinear_step(const Matrix& y_bar, const Matrix& x_prev) {
  const Matrix c = y_bar.rowwise() - y_bar.colwise().mean();
  if (!(c.norm() > 0.0)) return x_prev;
  Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeThinV);
  const Vector v = svd.matrixV().col(0);
  // Atoms of a uniform measure can be reordered freely; sorting along the
  // line keeps the chain free of reversals.
  Vector t = c * v;
  std::sort(t.data(), t.data() + t.size());
  return unit_variance_rows(t * v.transpose());
}

double ratio_of(const Matrix& x) {
  const Matrix c = x.rowwise() - x.colwise().mean();
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(c.rows()));
  return sd > 0.0 ? curve_length(x) / sd : std::numeric_limits<double>::infinity();
}

}  // namespace

SolveReport solve_cone_alternating(const DiscreteMeasure& nu, const DomainSpec& domain,
                                   const SolverConfig& cfg) {
  validate_domain(domain, nu.dim());
  cfg.validate();
  const auto* ratio = std::get_if<LengthSdRatio>(&domain);
  const auto* curv = std::get_if<BoundedCurvature>(&domain);
  if (!ratio && !curv) {
    throw Error(ErrorCode::kInvalidDomain, "cone solver handles ratio and curvature domains");
  }
  const std::size_t m = ratio ? ratio->m : curv->m;
  const double sm = std::sqrt(static_cast<double>(m));
  const Vector shift = barycenter(nu);
  const DiscreteMeasure nu_c = center(nu);
  const Matrix& y = nu_c.points();

  SolveReport r;
  r.domain = domain_name(domain);
  r.seed = cfg.seed;

  // Below the smallest attainable ratio (2, two atoms) only a point mass fits.
  if (ratio && ratio->bound < 2.0) {
    r.converged = true;
    r.diagnostics["lambda_hat"] = 0.0;
    detail::finish_report(r, DiscreteMeasure::dirac(Vector::Zero(nu.dim())), nu_c, shift);
    return r;
  }

  Matrix x;
  if (cfg.initial_atoms) {
    if (cfg.initial_atoms->rows() != static_cast<Eigen::Index>(m) ||
        cfg.initial_atoms->cols() != static_cast<Eigen::Index>(nu.dim())) {
      throw Error(ErrorCode::kDimensionMismatch, "initial atoms must be m x d");
    }
    x = unit_variance_rows(*cfg.initial_atoms);
  } else {
    x = unit_variance_rows(detail::principal_line(nu_c, m));
  }

  const Vector u = Vector::Constant(static_cast<Eigen::Index>(m), 1.0 / static_cast<double>(m));
  SinkhornWarmStart warm;
  Step2RatioState ratio_state;
  double step2_kkt = 0.0;
  double change = std::numeric_limits<double>::infinity();
  bool sphere_used = false;
  // Entropic couplings carry marginal noise that stalls the outer loop near
  // the Sinkhorn tolerance, so once the entropic phase has settled the
  // remaining steps use the exact kernel when the instance is small enough.
  const bool can_polish = m * nu_c.size() <= detail::kExactMetricCells;
  bool exact = cfg.exact_coupling_step;
  std::size_t polish_steps = 0;
  std::size_t it = 0;
  for (it = 1; it <= cfg.max_outer_iter; ++it) {
    const DiscreteMeasure mu_x(x, u, 1e-9);
    const Matrix cost = -x * y.transpose();
    const TransportResult pi =
        exact ? exact_ot(mu_x, nu_c, cost)
              : sinkhorn(mu_x, nu_c, cost, detail::relative_sinkhorn(cfg.sinkhorn, cost), &warm);
    if (exact && !cfg.exact_coupling_step) ++polish_steps;
    const Matrix y_bar = pi.coupling.mass * y;

    Matrix next;
    if (ratio) {
      const double beta = std::isfinite(ratio->bound) ? ratio->bound / sm : kInfinity;
      Step2Result s = step2_ratio(y_bar, beta, kRatioTol, &ratio_state);
      if (s.x.norm() < 1.0 - 1e-6 && s.x.norm() > 0.0) {
        s = step2_ratio_sphere(y_bar, beta, kRatioTol);
        sphere_used = true;
      }
      step2_kkt = s.kkt_residual;
      next = s.x.norm() > 0.0 ? Matrix(sm * s.x / s.x.norm()) : x;
    } else if (std::isinf(curv->curvature_penalty)) {
      next = collinear_step(y_bar, x);
      step2_kkt = 0.0;
    } else {
      const CurvatureStepResult s = step2_curvature(y_bar, curv->curvature_penalty, x, cfg);
      step2_kkt = s.kkt_residual;
      r.domain_residuals["curvature_fixed_point_change"] = s.fixed_point_change;
      next = s.x;
    }
    change = (next - x).cwiseAbs().maxCoeff();
    x = std::move(next);
    r.objective_history.push_back(pi.coupling.mass.cwiseProduct(x * y.transpose()).sum());
    if (change <= cfg.convergence_tol && exact) {
      r.converged = true;
      break;
    }
    if (!exact && change <= (can_polish ? 100.0 : 1.0) * cfg.convergence_tol) {
      if (!can_polish) {
        r.converged = true;
        break;
      }
      exact = true;
    }
  }
  r.iterations = std::min(it, cfg.max_outer_iter);

  // Final rescaling: lambda_hat makes the dominance inequality tight.
  const DiscreteMeasure mu_hat(x, u, 1e-9);
  const double corr = max_correlation(mu_hat, nu_c).value;
  const double m2 = second_moment(mu_hat);
  const double lambda_hat = m2 > 0.0 && corr > 0.0 ? corr / m2 : 0.0;
  const DiscreteMeasure mu_c =
      lambda_hat > 0.0 ? dilate(mu_hat, lambda_hat) : DiscreteMeasure::dirac(Vector::Zero(nu.dim()));
  const double var_star = variance(mu_c);
  r.diagnostics["lambda_hat"] = lambda_hat;
  r.diagnostics["lambda_check"] = var_star > 0.0 ? 1.0 / std::sqrt(var_star) : 0.0;
  r.diagnostics["lambda_product"] = lambda_hat * r.diagnostics["lambda_check"];
  r.diagnostics["exact_polish_steps"] = static_cast<double>(polish_steps);
  r.diagnostics["sphere_fallback"] = sphere_used ? 1.0 : 0.0;
  r.domain_residuals["step2_kkt"] = step2_kkt;
  r.domain_residuals["outer_change"] = change;
  r.domain_residuals["sum_x"] = x.colwise().sum().cwiseAbs().maxCoeff();
  if (ratio) {
    const double q = ratio_of(x);
    r.diagnostics["ratio"] = q;
    r.domain_residuals["ratio_excess"] = std::max(0.0, q - ratio->bound);
  } else {
    r.diagnostics["total_curvature"] = total_curvature(x);
  }
  detail::finish_report(r, mu_c, nu_c, shift);
  return r;
}

}  // namespace kdenoise
