#include "kdenoise/dominance.hpp"
#include "kdenoise/error.hpp"
#include "kdenoise/rng.hpp"
#include "kdenoise/solvers.hpp"
#include "solver_common.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <tuple>
#include <variant>
#include <vector>

namespace kdenoise {

namespace {

constexpr double kLengthPenaltyWeight = 1e3;
constexpr double kMassFloor = 1e-14;

// Domain penalty P(x) and its gradient.
struct Penalty {
  enum class Kind { kNone, kMonotone, kLength } kind = Kind::kNone;
  double weight = 0.0;
  double bound = 0.0;

  double value(const Matrix& x) const {
    switch (kind) {
      case Kind::kMonotone: {
        double p = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          for (Eigen::Index k = i + 1; k < x.rows(); ++k) {
            const double v = std::max(0.0, -(x(k, 0) - x(i, 0)) * (x(k, 1) - x(i, 1)));
            p += v * v;
          }
        }
        return p;
      }
      case Kind::kLength: {
        const double e = std::max(0.0, curve_length(x) - bound);
        return e * e;
      }
      case Kind::kNone:
        break;
    }
    return 0.0;
  }

  Matrix gradient(const Matrix& x) const {
    Matrix g = Matrix::Zero(x.rows(), x.cols());
    if (kind == Kind::kMonotone) {
      for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = i + 1; k < x.rows(); ++k) {
          const double a = x(k, 0) - x(i, 0);
          const double b = x(k, 1) - x(i, 1);
          const double v = std::max(0.0, -a * b);
          if (v == 0.0) continue;
          // d(v^2) = 2 v dv with v = -ab.
          g(k, 0) += -2.0 * v * b;
          g(i, 0) -= -2.0 * v * b;
          g(k, 1) += -2.0 * v * a;
          g(i, 1) -= -2.0 * v * a;
        }
      }
    } else if (kind == Kind::kLength) {
      const double e = std::max(0.0, curve_length(x) - bound);
      if (e > 0.0) {
        for (Eigen::Index i = 0; i + 1 < x.rows(); ++i) {
          const Eigen::RowVectorXd a = x.row(i + 1) - x.row(i);
          const double n = a.norm();
          if (n == 0.0) continue;
          g.row(i + 1) += 2.0 * e * a / n;
          g.row(i) -= 2.0 * e * a / n;
        }
      }
    }
    return g;
  }

  bool satisfied(const Matrix& x) const {
    switch (kind) {
      case Kind::kMonotone:
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
          for (Eigen::Index k = i + 1; k < x.rows(); ++k) {
            if ((x(k, 0) - x(i, 0)) * (x(k, 1) - x(i, 1)) < -1e-12) return false;
          }
        }
        return true;
      case Kind::kLength:
        return curve_length(x) <= bound + 1e-9;
      case Kind::kNone:
        break;
    }
    return true;
  }
};

struct State {
  Matrix x;
  Matrix pi;  // m x n, column sums fixed to nu's weights
};

Vector row_mass(const Matrix& pi) { return pi.rowwise().sum(); }

// Conditional barycenters c_i; rows without mass keep x_i.
Matrix barycenters(const Matrix& pi, const Matrix& y, const Matrix& x) {
  const Vector u = row_mass(pi);
  Matrix c = pi * y;
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    c.row(i) = u(i) > kMassFloor ? Matrix(c.row(i) / u(i)) : Matrix(x.row(i));
  }
  return c;
}

double transport_term(const Matrix& pi, const Matrix& x, const Matrix& y) {
  return pi.cwiseProduct(squared_distance_cost(x, y)).sum();
}

// sum_i |s_i|^2 / u_i with s_i = ybar_i - u_i x_i.
double defect_term(const Matrix& pi, const Matrix& x, const Matrix& y) {
  const Vector u = row_mass(pi);
  const Matrix s = pi * y - u.asDiagonal() * x;
  double t = 0.0;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    if (u(i) > kMassFloor) t += s.row(i).squaredNorm() / u(i);
  }
  return t;
}

double objective(const State& st, const Matrix& y, double kappa, const Penalty& pen) {
  return transport_term(st.pi, st.x, y) + kappa * defect_term(st.pi, st.x, y) +
         pen.weight * pen.value(st.x);
}

// Golden-section minimization of f on [0, 1].
double golden(const std::function<double(double)>& f) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 0.0;
  double b = 1.0;
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int it = 0; it < 60 && b - a > 1e-12; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  const double t = 0.5 * (a + b);
  return f(t) <= std::min(f(0.0), f(1.0)) ? t : (f(1.0) < f(0.0) ? 1.0 : 0.0);
}

// One Frank-Wolfe step on the coupling with x fixed.
void coupling_step(State& st, const Matrix& y, const Vector& v, double kappa) {
  const Eigen::Index m = st.x.rows();
  const Vector u = row_mass(st.pi);
  const Matrix c = barycenters(st.pi, y, st.x);
  const Matrix dvec = c - st.x;
  Matrix g = squared_distance_cost(st.x, y);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (u(i) <= kMassFloor) continue;
    const Eigen::RowVectorXd di = dvec.row(i);
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      g(i, j) += kappa * (2.0 * di.dot(y.row(j) - st.x.row(i)) - di.squaredNorm());
    }
  }
  Matrix vertex = Matrix::Zero(m, y.rows());
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    Eigen::Index best = 0;
    g.col(j).minCoeff(&best);
    vertex(best, j) = v(j);
  }
  const Matrix dir = vertex - st.pi;
  State trial = st;
  auto f = [&](double t) {
    trial.pi = st.pi + t * dir;
    return transport_term(trial.pi, st.x, y) + kappa * defect_term(trial.pi, st.x, y);
  };
  const double t = golden(f);
  st.pi += t * dir;
}

// Minimizes (1 + kappa) sum_i u_i |x_i - c_i|^2 + w P(x) by gradient steps
// with backtracking.
void position_step(State& st, const Matrix& y, double kappa, const Penalty& pen) {
  const Vector u = row_mass(st.pi);
  const Matrix c = barycenters(st.pi, y, st.x);
  auto h = [&](const Matrix& x) {
    double q = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) q += u(i) * (x.row(i) - c.row(i)).squaredNorm();
    return (1.0 + kappa) * q + pen.weight * pen.value(x);
  };
  if (pen.weight == 0.0 || pen.kind == Penalty::Kind::kNone) {
    for (Eigen::Index i = 0; i < st.x.rows(); ++i) {
      if (u(i) > kMassFloor) st.x.row(i) = c.row(i);
    }
    return;
  }
  double step = 1.0 / (2.0 * (1.0 + kappa) * std::max(u.maxCoeff(), kMassFloor));
  double hx = h(st.x);
  for (int it = 0; it < 500; ++it) {
    Matrix grad = 2.0 * (1.0 + kappa) * (u.asDiagonal() * (st.x - c)) +
                  pen.weight * pen.gradient(st.x);
    const double gn = grad.squaredNorm();
    if (gn <= 1e-30) break;
    double s = step;
    Matrix next;
    double hn = hx;
    for (int bt = 0; bt < 60; ++bt) {
      next = st.x - s * grad;
      hn = h(next);
      if (hn <= hx - 0.5 * s * gn) break;
      s *= 0.5;
    }
    if (!(hn < hx)) break;
    const double moved = (next - st.x).cwiseAbs().maxCoeff();
    st.x = std::move(next);
    const double gain = hx - hn;
    hx = hn;
    step = std::min(2.0 * s, 1.0);
    if (moved <= 1e-13 || gain <= 1e-16 * std::max(1.0, hx)) break;
  }
}

struct Run {
  Matrix x;
  Matrix pi;
  double variance = -1.0;
  bool feasible = false;
  double residual = std::numeric_limits<double>::infinity();
  std::vector<double> history;
  std::size_t iterations = 0;
  bool converged = false;
};

Run run_from(Matrix x0, const DiscreteMeasure& nu_c, const Penalty& pen, std::size_t max_outer,
             double tol) {
  const Matrix& y = nu_c.points();
  const Vector& v = nu_c.weights();
  const Eigen::Index m = x0.rows();
  State st{std::move(x0), Matrix::Zero(m, y.rows())};
  // Start from the nearest-atom assignment.
  for (Eigen::Index j = 0; j < y.rows(); ++j) {
    Eigen::Index best = 0;
    (st.x.rowwise() - y.row(j)).rowwise().squaredNorm().minCoeff(&best);
    st.pi(best, j) = v(j);
  }
  Run run;
  const std::vector<double> kappas{1.0, 10.0, 1e2, 1e3, 1e4, 1e5, 1e6};
  bool last_converged = false;
  for (double kappa : kappas) {
    last_converged = false;
    for (std::size_t it = 0; it < max_outer; ++it) {
      const Matrix x_prev = st.x;
      const Matrix pi_prev = st.pi;
      coupling_step(st, y, v, kappa);
      position_step(st, y, kappa, pen);
      run.history.push_back(objective(st, y, kappa, pen));
      ++run.iterations;
      const double change = std::max((st.x - x_prev).cwiseAbs().maxCoeff(),
                                     (st.pi - pi_prev).cwiseAbs().maxCoeff());
      if (change <= tol) {
        last_converged = true;
        break;
      }
    }
  }
  run.converged = last_converged;
  run.x = std::move(st.x);
  run.pi = std::move(st.pi);
  return run;
}

// Feasible runs first, then exact martingales, then variance (or a smaller
// martingale defect when not exact).
std::tuple<bool, bool, double> rank(const Run& run) {
  const bool exact = run.residual <= 1e-12;
  return {run.feasible, exact, exact ? run.variance : -run.residual};
}

Penalty make_penalty(const DomainSpec& domain) {
  Penalty p;
  if (const auto* d = std::get_if<MonotonePenalty>(&domain)) {
    p.kind = Penalty::Kind::kMonotone;
    p.weight = d->penalty_weight;
  } else if (const auto* d = std::get_if<BoundedLength>(&domain)) {
    p.kind = Penalty::Kind::kLength;
    p.weight = kLengthPenaltyWeight;
    p.bound = d->bound;
  }
  return p;
}

std::size_t atom_count(const DomainSpec& domain) {
  if (const auto* d = std::get_if<MonotonePenalty>(&domain)) return d->m;
  if (const auto* d = std::get_if<BoundedLength>(&domain)) return d->m;
  if (const auto* d = std::get_if<DiscreteSupport>(&domain)) return d->m;
  throw Error(ErrorCode::kInvalidDomain,
              "convex-order penalty solver handles monotone, bounded-length and discrete domains");
}

}  // namespace

SolveReport solve_convex_order_penalty(const DiscreteMeasure& nu, const DomainSpec& domain,
                                       const SolverConfig& cfg) {
  validate_domain(domain, nu.dim());
  cfg.validate();
  const std::size_t m = atom_count(domain);
  const Penalty pen = make_penalty(domain);
  const Vector shift = barycenter(nu);
  const DiscreteMeasure nu_c = center(nu);
  const Matrix& y = nu_c.points();
  const std::size_t max_outer = std::min<std::size_t>(cfg.max_outer_iter, 2000);

  std::vector<Matrix> starts;
  if (cfg.initial_atoms) {
    if (cfg.initial_atoms->rows() != static_cast<Eigen::Index>(m) ||
        cfg.initial_atoms->cols() != static_cast<Eigen::Index>(nu.dim())) {
      throw Error(ErrorCode::kDimensionMismatch, "initial atoms must be m x d");
    }
    starts.push_back(cfg.initial_atoms->rowwise() - shift.transpose());
  }
  starts.push_back(detail::principal_line(nu_c, m));
  // Lloyd's fixed point is already an exact martingale projection; it only
  // has to be pulled into the domain.
  SolverConfig lloyd_cfg = cfg;
  lloyd_cfg.initial_atoms.reset();
  const SolveReport lloyd = solve_discrete_support(nu_c, DiscreteSupport{m, std::nullopt}, lloyd_cfg);
  if (lloyd.mu_star.size() == m) starts.push_back(lloyd.mu_star.points());
  Rng rng(cfg.seed);
  for (std::size_t r = 0; r < cfg.restarts; ++r) starts.push_back(detail::kmeans_pp(nu_c, m, rng));

  Run best;
  auto consider = [&](Run run) {
    const Vector u = row_mass(run.pi);
    const Vector bary = run.x.transpose() * u;
    run.variance = u.dot(run.x.rowwise().squaredNorm()) - bary.squaredNorm();
    run.feasible = pen.satisfied(run.x);
    run.residual = (run.pi * y - u.asDiagonal() * run.x).cwiseAbs().maxCoeff();
    if (best.variance < 0.0 || rank(run) > rank(best)) best = std::move(run);
  };
  for (const Matrix& s : starts) {
    Run run = run_from(s, nu_c, pen, max_outer, cfg.convergence_tol);
    // Hard rounding: every target atom goes to its heaviest row and atoms
    // move to the cluster barycenters, which gives an exact martingale.
    Run hard = run;
    hard.pi.setZero();
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      Eigen::Index i = 0;
      run.pi.col(j).maxCoeff(&i);
      hard.pi(i, j) = nu_c.weights()(j);
    }
    hard.x = barycenters(hard.pi, y, run.x);
    // Snap to the conditional barycenters when they stay in the domain: the
    // coupling is then an exact martingale.
    const Matrix c = barycenters(run.pi, y, run.x);
    if (pen.satisfied(c)) run.x = c;
    consider(std::move(run));
    consider(std::move(hard));
  }

  // Drop rows that lost all their mass.
  const Vector u = row_mass(best.pi);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (u(i) > kMassFloor) keep.push_back(i);
  }
  const auto k = static_cast<Eigen::Index>(keep.size());
  Matrix pts(k, y.cols());
  Vector w(k);
  Coupling pi;
  pi.mass.resize(k, y.rows());
  for (Eigen::Index r = 0; r < k; ++r) {
    const Eigen::Index i = keep[static_cast<std::size_t>(r)];
    pts.row(r) = best.x.row(i);
    w(r) = u(i);
    pi.mass.row(r) = best.pi.row(i);
  }
  const DiscreteMeasure mu_c(pts, w / w.sum(), 1e-9);

  SolveReport r;
  r.domain = domain_name(domain);
  r.seed = cfg.seed;
  r.iterations = best.iterations;
  r.converged = best.converged;
  r.objective_history = std::move(best.history);
  r.diagnostics["restarts"] = static_cast<double>(starts.size());
  r.diagnostics["domain_penalty"] = pen.value(pts);
  r.domain_residuals["martingale_residual"] = martingale_residual(pi, mu_c, nu_c);
  r.domain_residuals["marginal_residual"] = marginal_residual(pi, mu_c, nu_c);
  r.domain_residuals["domain_violation"] = pen.satisfied(pts) ? 0.0 : pen.value(pts);
  detail::finish_report(r, mu_c, nu_c, shift, &pi);
  detail::attach_convex_order(r, mu_c, nu_c);
  return r;
}

}  // namespace kdenoise
