#include "kdenoise/dominance.hpp"
#include "kdenoise/error.hpp"
#include "kdenoise/rng.hpp"
#include "kdenoise/solvers.hpp"
#include "solver_common.hpp"

#include <limits>
#include <vector>

namespace kdenoise {

namespace {

struct LloydRun {
  Matrix centers;
  Vector weights;
  Coupling coupling;
  std::vector<double> history;
  std::size_t iterations = 0;
  bool converged = false;
  double objective = std::numeric_limits<double>::infinity();
};

}  // namespace

namespace detail {

Matrix kmeans_pp(const DiscreteMeasure& nu, std::size_t m, Rng& rng) {
  const Matrix& y = nu.points();
  const Vector& v = nu.weights();
  Matrix c(static_cast<Eigen::Index>(m), y.cols());
  auto draw = [&](const Vector& score) {
    const double total = score.sum();
    if (!(total > 0.0)) return Eigen::Index{0};
    double r = rng.uniform() * total;
    for (Eigen::Index j = 0; j < score.size(); ++j) {
      r -= score(j);
      if (r < 0.0 && score(j) > 0.0) return j;
    }
    Eigen::Index last = score.size() - 1;
    while (last > 0 && score(last) <= 0.0) --last;
    return last;
  };
  c.row(0) = y.row(draw(v));
  Vector d2 = (y.rowwise() - c.row(0)).rowwise().squaredNorm();
  for (Eigen::Index k = 1; k < c.rows(); ++k) {
    c.row(k) = y.row(draw(v.cwiseProduct(d2)));
    d2 = d2.cwiseMin((y.rowwise() - c.row(k)).rowwise().squaredNorm());
  }
  return c;
}

}  // namespace detail

namespace {

// Nearest center for each atom; ties go to the lowest center index.
std::vector<Eigen::Index> assign(const Matrix& y, const Matrix& c, Vector& dist2) {
  std::vector<Eigen::Index> a(static_cast<std::size_t>(y.rows()));
  dist2.resize(y.rows());
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index arg = 0;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      const double d = (y.row(j) - c.row(i)).squaredNorm();
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    a[static_cast<std::size_t>(j)] = arg;
    dist2(j) = best;
  }
  return a;
}

LloydRun lloyd_free(const DiscreteMeasure& nu, Matrix c, std::size_t max_iter) {
  const Matrix& y = nu.points();
  const Vector& v = nu.weights();
  const Eigen::Index m = c.rows();
  LloydRun run;
  std::vector<Eigen::Index> prev;
  Vector dist2;
  for (std::size_t it = 0; it < max_iter; ++it) {
    auto a = assign(y, c, dist2);
    Vector mass = Vector::Zero(m);
    for (Eigen::Index j = 0; j < y.rows(); ++j) mass(a[static_cast<std::size_t>(j)]) += v(j);
    // Reseed empty clusters at the atom farthest from its center.
    for (Eigen::Index i = 0; i < m; ++i) {
      if (mass(i) > 0.0) continue;
      Eigen::Index far = -1;
      double worst = 0.0;
      for (Eigen::Index j = 0; j < y.rows(); ++j) {
        if (v(j) > 0.0 && dist2(j) > worst) {
          worst = dist2(j);
          far = j;
        }
      }
      if (far < 0) break;  // every atom sits on a center already
      c.row(i) = y.row(far);
      a = assign(y, c, dist2);
      mass.setZero();
      for (Eigen::Index j = 0; j < y.rows(); ++j) mass(a[static_cast<std::size_t>(j)]) += v(j);
    }
    run.history.push_back(v.dot(dist2));
    Matrix sums = Matrix::Zero(m, y.cols());
    for (Eigen::Index j = 0; j < y.rows(); ++j) sums.row(a[static_cast<std::size_t>(j)]) += v(j) * y.row(j);
    for (Eigen::Index i = 0; i < m; ++i) {
      if (mass(i) > 0.0) c.row(i) = sums.row(i) / mass(i);
    }
    double obj = 0.0;
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      obj += v(j) * (y.row(j) - c.row(a[static_cast<std::size_t>(j)])).squaredNorm();
    }
    run.history.push_back(obj);
    run.iterations = it + 1;
    run.weights = mass;
    run.coupling.mass = Matrix::Zero(m, y.rows());
    for (Eigen::Index j = 0; j < y.rows(); ++j) run.coupling.mass(a[static_cast<std::size_t>(j)], j) = v(j);
    run.objective = obj;
    if (a == prev) {
      run.converged = true;
      break;
    }
    prev = std::move(a);
  }
  run.centers = std::move(c);
  return run;
}

LloydRun lloyd_fixed(const DiscreteMeasure& nu, const Vector& u, Matrix c, std::size_t max_iter,
                     double tol) {
  const Matrix& y = nu.points();
  LloydRun run;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const DiscreteMeasure mu(c, u, 1e-9);
    const TransportResult ot = w2_squared(mu, nu);
    run.history.push_back(ot.value);
    const Matrix s = ot.coupling.mass * y;
    Matrix next = c;
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      if (u(i) > 0.0) next.row(i) = s.row(i) / u(i);
    }
    const double obj = coupling_cost(ot.coupling, squared_distance_cost(next, y));
    run.history.push_back(obj);
    const double move = (next - c).cwiseAbs().maxCoeff();
    c = std::move(next);
    run.coupling = ot.coupling;
    run.objective = obj;
    run.iterations = it + 1;
    if (move <= tol) {
      run.converged = true;
      break;
    }
  }
  run.weights = u;
  run.centers = std::move(c);
  return run;
}

}  // namespace

SolveReport solve_discrete_support(const DiscreteMeasure& nu, const DiscreteSupport& domain,
                                   const SolverConfig& cfg,
                                   const std::vector<Matrix>& initial_centers) {
  validate_domain(domain, nu.dim());
  cfg.validate();
  const Vector shift = barycenter(nu);
  const DiscreteMeasure nu_c = center(nu);
  const auto m = static_cast<Eigen::Index>(domain.m);
  const std::size_t max_iter = std::min<std::size_t>(cfg.max_outer_iter, 10000);

  std::vector<Matrix> starts;
  for (const Matrix& s : initial_centers) {
    if (s.rows() != m || s.cols() != static_cast<Eigen::Index>(nu.dim())) {
      throw Error(ErrorCode::kDimensionMismatch, "initial centers must be m x d");
    }
    starts.push_back(s.rowwise() - shift.transpose());
  }
  if (cfg.initial_atoms) {
    if (cfg.initial_atoms->rows() != m) {
      throw Error(ErrorCode::kDimensionMismatch, "initial atoms must have m rows");
    }
    starts.push_back(cfg.initial_atoms->rowwise() - shift.transpose());
  }
  Rng rng(cfg.seed);
  for (std::size_t r = 0; r < cfg.restarts; ++r) starts.push_back(detail::kmeans_pp(nu_c, domain.m, rng));

  LloydRun best;
  for (const Matrix& s : starts) {
    LloydRun run = domain.fixed_weights
                       ? lloyd_fixed(nu_c, *domain.fixed_weights, s, max_iter, 1e-13)
                       : lloyd_free(nu_c, s, max_iter);
    if (run.objective < best.objective - 1e-14) best = std::move(run);
  }

  // Drop empty clusters from the output measure (free weights only).
  Matrix pts = best.centers;
  Vector w = best.weights;
  Coupling pi = best.coupling;
  if (!domain.fixed_weights) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      if (w(i) > 0.0) keep.push_back(i);
    }
    const auto k = static_cast<Eigen::Index>(keep.size());
    Matrix p2(k, pts.cols());
    Vector w2(k);
    Matrix pi2(k, pi.cols());
    for (Eigen::Index r = 0; r < k; ++r) {
      p2.row(r) = pts.row(keep[static_cast<std::size_t>(r)]);
      w2(r) = w(keep[static_cast<std::size_t>(r)]);
      pi2.row(r) = pi.mass.row(keep[static_cast<std::size_t>(r)]);
    }
    pts = std::move(p2);
    w = w2 / w2.sum();
    pi.mass = std::move(pi2);
  }
  const DiscreteMeasure mu_c(pts, w, 1e-9);

  SolveReport r;
  r.domain = "discrete";
  r.seed = cfg.seed;
  r.iterations = best.iterations;
  r.converged = best.converged;
  r.objective_history = std::move(best.history);
  r.diagnostics["restarts"] = static_cast<double>(starts.size());
  r.diagnostics["objective"] = best.objective;
  r.domain_residuals["martingale_residual"] = martingale_residual(pi, mu_c, nu_c);
  r.domain_residuals["marginal_residual"] = marginal_residual(pi, mu_c, nu_c);
  detail::finish_report(r, mu_c, nu_c, shift, &pi);
  detail::attach_convex_order(r, mu_c, nu_c);
  return r;
}

}  // namespace kdenoise
