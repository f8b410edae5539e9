#include "kdenoise/error.hpp"
#include "kdenoise/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace kdenoise {

namespace {

constexpr double kSegmentFloor = 1e-9;
constexpr std::size_t kAdmmMaxIter = 200000;

// Forward differences: row i is x_{i+1} - x_i.
Matrix diff(const Matrix& x) { return x.bottomRows(x.rows() - 1) - x.topRows(x.rows() - 1); }

// Adjoint of diff.
Matrix diff_adjoint(const Matrix& z, Eigen::Index m) {
  Matrix out = Matrix::Zero(m, z.cols());
  out.bottomRows(m - 1) += z;
  out.topRows(m - 1) -= z;
  return out;
}

double group_norm(const Matrix& z) { return z.rowwise().norm().sum(); }

// Orthonormal eigenbasis of the path Laplacian D^T D (DCT-II vectors) and
// its eigenvalues 4 sin^2(pi j / 2m).
struct PathBasis {
  Matrix v;
  Vector lambda;

  explicit PathBasis(Eigen::Index m) : v(m, m), lambda(m) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double s = j == 0 ? std::sqrt(1.0 / m) : std::sqrt(2.0 / m);
      for (Eigen::Index i = 0; i < m; ++i) {
        v(i, j) = s * std::cos(M_PI * j * (i + 0.5) / m);
      }
      const double h = std::sin(M_PI * j / (2.0 * m));
      lambda(j) = 4.0 * h * h;
    }
  }
};

// argmin over {sum x = 0, |x| <= 1} of (rho/2) |Dx|^2 - <x, q>.
Matrix ball_quadratic(const PathBasis& basis, const Matrix& q, double rho) {
  Matrix r = basis.v.transpose() * q;
  r.row(0).setZero();
  const Vector r2 = r.rowwise().squaredNorm();
  auto sumsq = [&](double gamma) {
    double s = 0.0;
    for (Eigen::Index j = 1; j < r2.size(); ++j) {
      const double den = rho * basis.lambda(j) + 2.0 * gamma;
      s += r2(j) / (den * den);
    }
    return s;
  };
  double gamma = 0.0;
  if (sumsq(0.0) > 1.0) {
    // sumsq is decreasing in gamma; bracket and bisect, Newton-accelerated.
    double lo = 0.0;
    double hi = 0.5 * std::sqrt(r2.sum()) + 1e-300;
    gamma = hi;
    for (int it = 0; it < 200; ++it) {
      const double s = sumsq(gamma);
      if (s > 1.0) {
        lo = gamma;
      } else {
        hi = gamma;
      }
      double ds = 0.0;
      for (Eigen::Index j = 1; j < r2.size(); ++j) {
        const double den = rho * basis.lambda(j) + 2.0 * gamma;
        ds -= 4.0 * r2(j) / (den * den * den);
      }
      double next = ds < 0.0 ? gamma - (s - 1.0) / ds : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - gamma) <= 1e-16 * std::max(1.0, gamma)) {
        gamma = next;
        break;
      }
      gamma = next;
    }
  }
  for (Eigen::Index j = 1; j < r.rows(); ++j) r.row(j) /= rho * basis.lambda(j) + 2.0 * gamma;
  return basis.v * r;
}

// Projection of the rows of v onto {z : sum_i |z_i| <= radius}.
Matrix project_group_ball(const Matrix& v, double radius) {
  const Vector n = v.rowwise().norm();
  if (n.sum() <= radius) return v;
  std::vector<double> s(n.data(), n.data() + n.size());
  std::sort(s.begin(), s.end(), std::greater<>());
  double cum = 0.0;
  double tau = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    cum += s[k];
    const double t = (cum - radius) / static_cast<double>(k + 1);
    if (k + 1 == s.size() || s[k + 1] <= t) {
      tau = t;
      break;
    }
  }
  Matrix z = v;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    z.row(i) *= n(i) > tau ? (n(i) - tau) / n(i) : 0.0;
  }
  return z;
}

// Row-wise soft threshold: prox of t * sum_i |z_i|.
Matrix group_shrink(const Matrix& v, double t) {
  Matrix z = v;
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double n = v.row(i).norm();
    z.row(i) *= n > t ? 1.0 - t / n : 0.0;
  }
  return z;
}

// ADMM on  min -<x, q0> + I_ball(x) + h(z)  s.t.  Dx = z, where the z-step is
// supplied as `prox(v, rho)`.
Step2Result admm(const Matrix& q0, const std::function<Matrix(const Matrix&, double)>& prox,
                 double tol, Step2RatioState* state) {
  const Eigen::Index m = q0.rows();
  const PathBasis basis(m);
  Step2RatioState local;
  Step2RatioState& st = state ? *state : local;
  if (st.z.rows() != m - 1 || st.z.cols() != q0.cols() || !(st.rho > 0.0)) {
    st.z = diff(q0);
    st.w = Matrix::Zero(m - 1, q0.cols());
    st.rho = 1.0;
  }
  Step2Result res;
  res.converged = false;
  Matrix x;
  for (std::size_t it = 1; it <= kAdmmMaxIter; ++it) {
    x = ball_quadratic(basis, q0 + st.rho * diff_adjoint(st.z - st.w, m), st.rho);
    const Matrix dx = diff(x);
    const Matrix z_prev = st.z;
    st.z = prox(dx + st.w, st.rho);
    st.w += dx - st.z;
    const double primal = (dx - st.z).cwiseAbs().maxCoeff();
    const double dual = st.rho * diff_adjoint(st.z - z_prev, m).cwiseAbs().maxCoeff();
    res.iterations = it;
    res.kkt_residual = std::max(primal, dual);
    if (res.kkt_residual <= tol) {
      res.converged = true;
      break;
    }
    if (it % 20 == 0) {
      if (primal > 10.0 * dual) {
        st.rho *= 2.0;
        st.w *= 0.5;
      } else if (dual > 10.0 * primal) {
        st.rho *= 0.5;
        st.w *= 2.0;
      }
    }
  }
  res.x = std::move(x);
  return res;
}

// Centered y_bar scaled to unit norm; false when it vanishes.
bool normalized_target(const Matrix& y_bar, Matrix& q0) {
  q0 = y_bar.rowwise() - y_bar.colwise().mean();
  const double n = q0.norm();
  if (!(n > 0.0)) return false;
  q0 /= n;
  return true;
}

Vector unit_or_zero(const Eigen::RowVectorXd& a) {
  const double n = a.norm();
  return n < kSegmentFloor ? Vector::Zero(a.size()) : Vector(a.transpose() / n);
}

}  // namespace

Step2Result step2_ratio(const Matrix& y_bar, double bound, double tol, Step2RatioState* warm) {
  if (y_bar.rows() < 2) throw Error(ErrorCode::kInvalidDomain, "ratio step needs m >= 2");
  if (!(bound >= 0.0)) throw Error(ErrorCode::kInvalidDomain, "ratio step needs bound >= 0");
  Matrix q0;
  if (!normalized_target(y_bar, q0)) return {Matrix::Zero(y_bar.rows(), y_bar.cols()), 0.0, 0, true};
  // The Cauchy-Schwarz maximizer is optimal whenever it fits the length bound.
  if (group_norm(diff(q0)) <= bound) return {q0, 0.0, 0, true};
  return admm(
      q0, [bound](const Matrix& v, double) { return project_group_ball(v, bound); }, tol, warm);
}

Step2Result step2_ratio_sphere(const Matrix& y_bar, double bound, double tol) {
  if (y_bar.rows() < 2) throw Error(ErrorCode::kInvalidDomain, "ratio step needs m >= 2");
  Matrix q0;
  if (!normalized_target(y_bar, q0)) return {Matrix::Zero(y_bar.rows(), y_bar.cols()), 0.0, 0, true};
  if (group_norm(diff(q0)) <= bound) return {q0, 0.0, 0, true};

  Step2RatioState state;
  auto solve = [&](double penalty) {
    return admm(
        q0, [penalty](const Matrix& v, double rho) { return group_shrink(v, penalty / rho); },
        tol, &state);
  };
  auto fits = [&](const Step2Result& r) {
    return r.x.norm() > 0.5 && group_norm(diff(r.x)) <= bound;
  };
  // Grow the penalty until the length fits or the maximizer collapses.
  double lo = 0.0;
  double hi = 1e-3;
  Step2Result best{Matrix::Zero(q0.rows(), q0.cols()), 0.0, 0, true};
  bool have = false;
  std::size_t total = 0;
  for (int k = 0; k < 60; ++k) {
    Step2Result r = solve(hi);
    total += r.iterations;
    if (fits(r)) {
      best = std::move(r);
      have = true;
      break;
    }
    if (r.x.norm() <= 0.5) break;
    lo = hi;
    hi *= 2.0;
  }
  if (!have) {
    best.iterations = total;
    return best;
  }
  for (int k = 0; k < 60 && hi - lo > 1e-12 * hi; ++k) {
    const double mid = 0.5 * (lo + hi);
    Step2Result r = solve(mid);
    total += r.iterations;
    if (fits(r)) {
      best = std::move(r);
      hi = mid;
    } else {
      lo = mid;
    }
    if (bound - group_norm(diff(best.x)) <= 1e-9 * std::max(1.0, bound)) break;
  }
  best.x /= best.x.norm();
  best.iterations = total;
  return best;
}

std::optional<Matrix> curvature_linear_maximizer(const Matrix& c) {
  const Eigen::Index m = c.rows();
  const Matrix centered = c.rowwise() - c.colwise().mean();
  const double beta = 0.5 * std::sqrt(centered.squaredNorm() / static_cast<double>(m));
  if (!(beta > 1e-300) || centered.cwiseAbs().maxCoeff() <= 1e-15 * c.cwiseAbs().maxCoeff()) {
    return std::nullopt;
  }
  return Matrix(centered / (2.0 * beta));
}

Matrix curvature_gradient(const Matrix& x) {
  const Eigen::Index m = x.rows();
  Matrix phi = Matrix::Zero(m, x.cols());
  for (Eigen::Index i = 1; i + 1 < m; ++i) {
    const double ln = (x.row(i + 1) - x.row(i)).norm();
    const double lp = (x.row(i) - x.row(i - 1)).norm();
    if (ln < kSegmentFloor || lp < kSegmentFloor) continue;
    const Vector e = unit_or_zero(x.row(i + 1) - x.row(i)) - unit_or_zero(x.row(i) - x.row(i - 1));
    phi.row(i) = -0.25 * e.transpose() * (1.0 / ln + 1.0 / lp);
  }
  return phi;
}

double total_curvature(const Matrix& x) {
  double total = 0.0;
  for (Eigen::Index i = 1; i + 1 < x.rows(); ++i) {
    const Vector e = unit_or_zero(x.row(i + 1) - x.row(i)) - unit_or_zero(x.row(i) - x.row(i - 1));
    total += 0.25 * e.squaredNorm();
  }
  return total;
}

CurvatureStepResult step2_curvature(const Matrix& y_bar, double lambda, const Matrix& x_prev,
                                    const SolverConfig& cfg) {
  if (y_bar.rows() != x_prev.rows() || y_bar.cols() != x_prev.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "curvature step: shapes differ");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::kInvalidDomain, "curvature step: penalty must be finite and >= 0");
  }
  constexpr double kFixedPointTol = 1e-8;
  constexpr std::size_t kMaxInner = 100000;
  CurvatureStepResult res;
  res.converged = false;
  Matrix x = x_prev;
  Matrix xhat;
  for (std::size_t it = 1; it <= kMaxInner; ++it) {
    const Matrix c = lambda == 0.0 ? y_bar : Matrix(y_bar - lambda * curvature_gradient(x));
    const auto sol = curvature_linear_maximizer(c);
    if (!sol) {
      res.x = x_prev;
      res.degenerate = true;
      res.iterations = it;
      return res;
    }
    xhat = *sol;
    const Matrix centered = c.rowwise() - c.colwise().mean();
    const double beta = 0.5 * std::sqrt(centered.squaredNorm() / static_cast<double>(c.rows()));
    res.kkt_residual = (centered - 2.0 * beta * xhat).cwiseAbs().maxCoeff();
    const Matrix next = cfg.mixing * xhat + (1.0 - cfg.mixing) * x;
    res.fixed_point_change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    res.iterations = it;
    if (res.fixed_point_change <= kFixedPointTol) {
      res.converged = true;
      break;
    }
  }
  res.x = std::move(xhat);
  return res;
}

}  // namespace kdenoise
