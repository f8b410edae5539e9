#include "kdenoise/dominance.hpp"
#include "kdenoise/error.hpp"
#include "kdenoise/solvers.hpp"
#include "solver_common.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace kdenoise {

namespace {

// Weights clipped at zero and renormalized; uniform if nothing is left.
Vector feasible_weights(const Vector& u) {
  Vector w = u.cwiseMax(0.0);
  const double s = w.sum();
  if (!(s > 0.0)) return Vector::Constant(u.size(), 1.0 / static_cast<double>(u.size()));
  return w / s;
}

// Gradient of the smoothed norm sqrt(|a|^2 + delta^2). Without smoothing a
// nearly collapsed segment flips direction every step.
Vector unit(const Eigen::RowVectorXd& a, double delta) {
  const double n = std::sqrt(a.squaredNorm() + delta * delta);
  return n > 0.0 ? Vector(a.transpose() / n) : Vector::Zero(a.size());
}

}  // namespace

SolveReport solve_bounded_length(const DiscreteMeasure& nu, const BoundedLength& domain,
                                 const SolverConfig& cfg) {
  validate_domain(domain, nu.dim());
  cfg.validate();
  const Vector shift = barycenter(nu);
  const DiscreteMeasure nu_c = center(nu);
  const Matrix& y = nu_c.points();
  const double m2_nu = second_moment(nu_c);
  const auto m = static_cast<Eigen::Index>(domain.m);
  const auto d = static_cast<Eigen::Index>(nu.dim());
  const double bound = domain.bound;

  SolveReport r;
  r.domain = domain_name(DomainSpec(domain));
  r.seed = cfg.seed;

  if (bound == 0.0 || m == 1) {
    r.converged = true;
    detail::finish_report(r, DiscreteMeasure::dirac(Vector::Zero(d)), nu_c, shift);
    return r;
  }

  Matrix x;
  if (cfg.initial_atoms) {
    if (cfg.initial_atoms->rows() != m || cfg.initial_atoms->cols() != d) {
      throw Error(ErrorCode::kDimensionMismatch, "initial atoms must be m x d");
    }
    x = cfg.initial_atoms->rowwise() - shift.transpose();
  } else {
    x = detail::principal_line(nu_c, domain.m);
  }
  Vector u = Vector::Constant(m, 1.0 / static_cast<double>(m));

  const MultiplierSteps& eta = cfg.multiplier_step_sizes;
  double lambda1 = 0.0;
  Vector lambda1_i = Vector::Zero(m);
  double lambda2 = 0.0;
  // At a tight dominance point with inactive length bound, stationarity in x
  // puts each atom at its conditional barycenter, which needs lambda3 = 1.
  // Starting there keeps the variance term from running away.
  double lambda3 = 1.0;
  double sinkhorn_iters = 0.0;

  // Convergence: the largest single-step change over a trailing window.
  constexpr std::size_t kWindow = 50;
  std::deque<double> recent;
  SinkhornWarmStart warm;
  std::size_t it = 0;
  for (it = 1; it <= cfg.max_outer_iter; ++it) {
    const Vector w = feasible_weights(u);
    const DiscreteMeasure mu(x, w, 1e-9);
    const Matrix cost = squared_distance_cost(x, y);
    const TransportResult ot =
        cfg.exact_coupling_step
            ? exact_ot(mu, nu_c, cost)
            : sinkhorn(mu, nu_c, cost, detail::relative_sinkhorn(cfg.sinkhorn, cost), &warm);
    const Matrix& pi = ot.coupling.mass;
    sinkhorn_iters += static_cast<double>(ot.iterations);
    const Vector bary = x.transpose() * u;
    const Vector sq = x.rowwise().squaredNorm();

    Matrix gx(m, d);
    Vector gu(m);
    const Matrix pi_y = pi * y;
    const Vector pi_rows = pi.rowwise().sum();
    const double delta = cfg.step_size_x * lambda2;
    for (Eigen::Index i = 0; i < m; ++i) {
      Vector g = 2.0 * u(i) * (x.row(i).transpose() - bary);
      g -= 2.0 * lambda3 * u(i) * x.row(i).transpose();
      g -= 2.0 * lambda3 * (pi_rows(i) * x.row(i) - pi_y.row(i)).transpose();
      if (i + 1 < m) g += lambda2 * unit(x.row(i + 1) - x.row(i), delta);
      if (i > 0) g -= lambda2 * unit(x.row(i) - x.row(i - 1), delta);
      gx.row(i) = g.transpose();
      const double transport_i = pi.row(i).dot(cost.row(i));
      gu(i) = sq(i) - 2.0 * bary.dot(x.row(i)) - lambda1 + lambda1_i(i) -
              lambda3 * (sq(i) + transport_i);
    }
    if (!domain.optimize_weights) gu.setZero();

    const Matrix dx = cfg.step_size_x * gx;
    const Vector du = cfg.step_size_u * gu;
    x += dx;
    u += du;

    const double step = 1.0 / std::sqrt(static_cast<double>(it));
    // The multiplier of sum u = 1 enters the u-gradient as -lambda1, so it
    // rises while the weights overshoot.
    lambda1 += eta.lambda1 * step * (u.sum() - 1.0);
    lambda1_i = (lambda1_i - eta.lambda1_i * step * u).cwiseMax(0.0);
    lambda2 = std::max(0.0, lambda2 + eta.lambda2 * step * (curve_length(x) - bound));
    const double kdr_gap = ot.value - m2_nu + u.dot(x.rowwise().squaredNorm());
    lambda3 = std::max(0.0, lambda3 + eta.lambda3 * step * kdr_gap);

    r.objective_history.push_back(sq.dot(u) - bary.squaredNorm());
    recent.push_back(std::max(dx.cwiseAbs().maxCoeff(), du.cwiseAbs().maxCoeff()));
    if (recent.size() > kWindow) recent.pop_front();
    if (recent.size() == kWindow &&
        *std::max_element(recent.begin(), recent.end()) <= cfg.convergence_tol) {
      r.converged = true;
      break;
    }
  }
  r.iterations = std::min(it, cfg.max_outer_iter);

  // Feasibility pass: weights onto the simplex and the barycenter onto nu's,
  // then a dilation about it. Dilating by s keeps dominance iff
  // s <= corr / M2 and keeps the length bound iff s <= B / L, so the largest
  // such s is feasible and never lowers the variance when it is >= 1.
  const Vector w = feasible_weights(u);
  const Vector bary = x.transpose() * w;
  const DiscreteMeasure mu_pre(x.rowwise() - bary.transpose(), w, 1e-9);
  const KdrVerdict pre = kdr_check(mu_pre, nu_c);
  const double length = curve_length(mu_pre.points());
  const double m2 = second_moment(mu_pre);
  const double corr = max_correlation(mu_pre, nu_c).value;
  const double kdr_limit = m2 > 0.0 ? std::max(0.0, corr / m2) : 0.0;
  const double length_limit = length > 0.0 ? bound / length : kInfinity;
  const double scale = std::min(kdr_limit, length_limit);
  const DiscreteMeasure mu_c =
      scale > 0.0 ? dilate(mu_pre, scale) : DiscreteMeasure::dirac(Vector::Zero(d));

  r.diagnostics["lambda1"] = lambda1;
  r.diagnostics["lambda2"] = lambda2;
  r.diagnostics["lambda3"] = lambda3;
  r.diagnostics["sinkhorn_iterations_mean"] = sinkhorn_iters / static_cast<double>(r.iterations);
  r.diagnostics["final_scale"] = scale;
  r.diagnostics["length_before_polish"] = length;
  r.diagnostics["last_step"] = recent.empty() ? 0.0 : recent.back();
  r.diagnostics["slack_before_polish"] = pre.slack;
  r.diagnostics["length"] = curve_length(mu_c.points());
  r.domain_residuals["length_excess"] = std::max(0.0, r.diagnostics["length"] - bound);
  r.domain_residuals["weight_sum"] = std::abs(mu_c.weights().sum() - 1.0);
  r.domain_residuals["negative_weight_clipped"] = std::max(0.0, -u.minCoeff());
  detail::finish_report(r, mu_c, nu_c, shift);
  return r;
}

}  // namespace kdenoise
