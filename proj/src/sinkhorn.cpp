#include "kdenoise/error.hpp"
#include "kdenoise/transport.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace kdenoise {

namespace {

using Array = Eigen::ArrayXd;
using Array2 = Eigen::ArrayXXd;

// eps * log sum_j exp((g_j - C_ij) / eps) for every row i.
Array row_softmin(const Array2& cost, const Array& g, double eps) {
  Array2 z = (-cost).rowwise() + g.transpose();
  z /= eps;
  const Array zmax = z.rowwise().maxCoeff();
  z.colwise() -= zmax;
  return eps * (zmax + z.exp().rowwise().sum().log());
}

Array col_softmin(const Array2& cost, const Array& f, double eps) {
  Array2 z = (-cost).colwise() + f;
  z /= eps;
  const Array zmax = z.colwise().maxCoeff().transpose();
  z.rowwise() -= zmax.transpose();
  return eps * (zmax + z.exp().colwise().sum().transpose().log());
}

Array2 plan_from_potentials(const Array2& cost, const Array& f, const Array& g, double eps) {
  Array2 z = (-cost).colwise() + f;
  z.rowwise() += g.transpose();
  // Entries below 1e-200 are flushed to zero: left in, they turn into
  // subnormals once multiplied by the scalings and arithmetic on those is
  // two orders of magnitude slower. The dropped mass is below 1e-100.
  return (z / eps).exp().unaryExpr([](double x) { return x < 1e-200 ? 0.0 : x; });
}

}  // namespace

Matrix round_to_marginals(const Matrix& plan, const Vector& a, const Vector& b) {
  Matrix p = plan.cwiseMax(0.0);
  const Vector r = p.rowwise().sum();
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    if (r(i) > a(i)) p.row(i) *= a(i) / r(i);
  }
  const Vector c = p.colwise().sum().transpose();
  for (Eigen::Index j = 0; j < p.cols(); ++j) {
    if (c(j) > b(j)) p.col(j) *= b(j) / c(j);
  }
  const Vector err_a = (a - p.rowwise().sum()).cwiseMax(0.0);
  const Vector err_b = (b - p.colwise().sum().transpose()).cwiseMax(0.0);
  const double total = err_a.sum();
  if (total > 0.0) p += err_a * err_b.transpose() / total;
  return p;
}

TransportResult sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const Matrix& cost, const SinkhornConfig& cfg) {
  return sinkhorn(mu, nu, cost, cfg, nullptr);
}

TransportResult sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                         const Matrix& cost, const SinkhornConfig& cfg,
                         SinkhornWarmStart* warm) {
  cfg.validate();
  if (cost.rows() != static_cast<Eigen::Index>(mu.size()) ||
      cost.cols() != static_cast<Eigen::Index>(nu.size())) {
    throw Error(ErrorCode::kDimensionMismatch, "cost matrix shape does not match the measures");
  }

  // Strip zero-weight atoms; their rows/columns come back as zeros.
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < mu.weights().size(); ++i) {
    if (mu.weights()(i) > 0.0) rows.push_back(i);
  }
  for (Eigen::Index j = 0; j < nu.weights().size(); ++j) {
    if (nu.weights()(j) > 0.0) cols.push_back(j);
  }
  const auto m = static_cast<Eigen::Index>(rows.size());
  const auto n = static_cast<Eigen::Index>(cols.size());
  Vector a(m);
  Vector b(n);
  Array2 c(m, n);
  for (Eigen::Index r = 0; r < m; ++r) a(r) = mu.weights()(rows[static_cast<std::size_t>(r)]);
  for (Eigen::Index s = 0; s < n; ++s) b(s) = nu.weights()(cols[static_cast<std::size_t>(s)]);
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      c(r, s) = cost(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(s)]);
    }
  }
  const Array log_a = a.array().log();
  const Array log_b = b.array().log();

  Array f = Array::Zero(m);
  Array g = Array::Zero(n);
  const bool warm_ok = warm != nullptr && warm->f.size() == static_cast<Eigen::Index>(mu.size()) &&
                       warm->g.size() == static_cast<Eigen::Index>(nu.size());
  if (warm_ok) {
    for (Eigen::Index r = 0; r < m; ++r) f(r) = warm->f(rows[static_cast<std::size_t>(r)]);
    for (Eigen::Index s = 0; s < n; ++s) g(s) = warm->g(cols[static_cast<std::size_t>(s)]);
  }

  // Epsilon schedule: halve from the cost range down to the target.
  std::vector<double> schedule;
  if (cfg.use_epsilon_scaling && !warm_ok) {
    const double range = std::max(c.maxCoeff() - c.minCoeff(), cfg.epsilon);
    for (double e = range; e > cfg.epsilon; e *= 0.5) schedule.push_back(e);
  }
  schedule.push_back(cfg.epsilon);

  TransportResult res;
  res.method = TransportMethod::kEntropic;
  double err = 0.0;
  // Scaling-form iterations on the kernel exp((f + g - C) / eps) with
  // absorption into the log potentials whenever the scalings leave
  // [1e-100, 1e100]; a log-domain update stands in when a kernel row or
  // column underflows entirely.
  constexpr double kAbsorb = 1e100;
  for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
    const double eps = schedule[stage];
    const bool last = stage + 1 == schedule.size();
    const double stage_tol = last ? cfg.marginal_tol : std::max(cfg.marginal_tol, 1e-3);
    Matrix kernel = plan_from_potentials(c, f, g, eps).matrix();
    Vector u = Vector::Ones(m);
    Vector v = Vector::Ones(n);
    auto absorb = [&] {
      f += eps * u.array().log();
      g += eps * v.array().log();
      u.setOnes();
      v.setOnes();
      kernel = plan_from_potentials(c, f, g, eps).matrix();
    };
    while (res.iterations < cfg.max_iter) {
      const Vector kv = kernel * v;
      if (!(kv.minCoeff() > 1e-300)) {
        absorb();
        f = eps * log_a - row_softmin(c, g, eps);
        kernel = plan_from_potentials(c, f, g, eps).matrix();
      } else {
        u = a.cwiseQuotient(kv);
      }
      const Vector ktu = kernel.transpose() * u;
      if (!(ktu.minCoeff() > 1e-300)) {
        absorb();
        g = eps * log_b - col_softmin(c, f, eps);
        kernel = plan_from_potentials(c, f, g, eps).matrix();
      } else {
        v = b.cwiseQuotient(ktu);
      }
      ++res.iterations;
      // Columns are exact after the v update.
      err = (u.cwiseProduct(kernel * v) - a).cwiseAbs().sum();
      if (err <= stage_tol) break;
      if (u.maxCoeff() > kAbsorb || v.maxCoeff() > kAbsorb || u.minCoeff() < 1.0 / kAbsorb ||
          v.minCoeff() < 1.0 / kAbsorb) {
        absorb();
      }
    }
    absorb();
    if (res.iterations >= cfg.max_iter) break;
  }
  res.marginal_error_before_rounding = err;
  res.converged = err <= cfg.marginal_tol;

  const Matrix plan = plan_from_potentials(c, f, g, schedule.back()).matrix();
  const Matrix rounded = round_to_marginals(plan, a, b);
  res.coupling.mass = Matrix::Zero(static_cast<Eigen::Index>(mu.size()),
                                   static_cast<Eigen::Index>(nu.size()));
  for (Eigen::Index r = 0; r < m; ++r) {
    for (Eigen::Index s = 0; s < n; ++s) {
      res.coupling.mass(rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(s)]) =
          rounded(r, s);
    }
  }
  res.value = coupling_cost(res.coupling, cost);

  if (warm != nullptr) {
    warm->f = Vector::Zero(static_cast<Eigen::Index>(mu.size()));
    warm->g = Vector::Zero(static_cast<Eigen::Index>(nu.size()));
    for (Eigen::Index r = 0; r < m; ++r) warm->f(rows[static_cast<std::size_t>(r)]) = f(r);
    for (Eigen::Index s = 0; s < n; ++s) warm->g(cols[static_cast<std::size_t>(s)]) = g(s);
  }
  return res;
}

}  // namespace kdenoise
