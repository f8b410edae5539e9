#include "kdenoise/dominance.hpp"
#include "kdenoise/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kdenoise {

namespace {

Matrix rows(std::initializer_list<std::pair<double, double>> pts) {
  Matrix p(static_cast<Eigen::Index>(pts.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [a, b] : pts) {
    p(i, 0) = a;
    p(i, 1) = b;
    ++i;
  }
  return p;
}

double product_cost(const Eigen::RowVectorXd& u, const Eigen::RowVectorXd& v) {
  return (u(0) - v(0)) * (u(1) - v(1));
}

// min over t in [0,1] of t(1-t) c(y0,y1) - (1-t) c(x0,y0) - t c(x1,y1). The
// expression is quadratic in t, so the endpoints and the vertex suffice.
double kramkov_margin(double c01, double c0, double c1) {
  auto f = [&](double t) { return t * (1.0 - t) * c01 - (1.0 - t) * c0 - t * c1; };
  double best = std::min(f(0.0), f(1.0));
  if (c01 < 0.0) {
    const double t = std::clamp(0.5 + (c0 - c1) / (2.0 * c01), 0.0, 1.0);
    best = std::min(best, f(t));
  }
  return best;
}

}  // namespace

KramkovComparison verify_kramkov_comparison() {
  const DiscreteMeasure nu(rows({{0, 0}, {-3, 3}, {2, 2}, {-1, 5}}), Vector::Constant(4, 0.25));
  const DiscreteMeasure mu_k(rows({{-1.5, 1.5}, {0.5, 3.5}}), Vector::Constant(2, 0.5));
  Vector wm(3);
  wm << 0.3, 0.4, 0.3;
  const DiscreteMeasure mu_m(rows({{-0.5, 0.5}, {-0.5, 2.5}, {-0.5, 4.5}}), wm);

  Coupling pi_k;
  pi_k.mass = Matrix::Zero(2, 4);
  pi_k.mass(0, 0) = pi_k.mass(0, 1) = 0.25;
  pi_k.mass(1, 2) = pi_k.mass(1, 3) = 0.25;
  Coupling pi_m;
  pi_m.mass = Matrix::Zero(3, 4);
  pi_m.mass(0, 0) = 0.25;
  pi_m.mass(0, 1) = 0.05;
  pi_m.mass(1, 1) = 0.2;
  pi_m.mass(2, 3) = 0.25;
  pi_m.mass(2, 2) = 0.05;
  pi_m.mass(1, 2) = 0.2;

  KramkovComparison out;
  out.martingale_residual_k = martingale_residual(pi_k, mu_k, nu);
  out.martingale_residual_m = martingale_residual(pi_m, mu_m, nu);
  out.marginal_residual_k = marginal_residual(pi_k, mu_k, nu);
  out.marginal_residual_m = marginal_residual(pi_m, mu_m, nu);

  double margin = std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < pi_k.rows(); ++a) {
    for (Eigen::Index b = 0; b < pi_k.cols(); ++b) {
      if (pi_k.mass(a, b) <= 0.0) continue;
      for (Eigen::Index c = 0; c < pi_k.rows(); ++c) {
        for (Eigen::Index e = 0; e < pi_k.cols(); ++e) {
          if (pi_k.mass(c, e) <= 0.0) continue;
          const double c01 = product_cost(nu.points().row(b), nu.points().row(e));
          const double c0 = product_cost(mu_k.points().row(a), nu.points().row(b));
          const double c1 = product_cost(mu_k.points().row(c), nu.points().row(e));
          margin = std::min(margin, kramkov_margin(c01, c0, c1));
        }
      }
    }
  }
  out.kramkov_min_margin = margin;
  out.kramkov_holds = margin >= -1e-12;

  out.cost_k = coupling_cost(pi_k, squared_distance_cost(mu_k.points(), nu.points()));
  out.cost_m = coupling_cost(pi_m, squared_distance_cost(mu_m.points(), nu.points()));
  out.variance_gap_k = variance(nu) - variance(mu_k);
  out.variance_gap_m = variance(nu) - variance(mu_m);
  out.passed = out.martingale_residual_k <= 1e-12 && out.martingale_residual_m <= 1e-12 &&
               out.marginal_residual_k <= 1e-12 && out.marginal_residual_m <= 1e-12 &&
               out.kramkov_holds && std::abs(out.cost_k - 4.5) <= 1e-12 &&
               std::abs(out.cost_m - 4.1) <= 1e-12 && out.cost_m < out.cost_k;
  return out;
}

}  // namespace kdenoise
