#include "kdenoise/error.hpp"
#include "kdenoise/solvers.hpp"
#include "solver_common.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace kdenoise {

SubspaceResult solve_subspace(const DiscreteMeasure& nu, std::size_t subspace_dim) {
  validate_domain(Subspace{subspace_dim}, nu.dim());
  const Vector shift = barycenter(nu);
  const DiscreteMeasure nu_c = center(nu);
  const auto d = static_cast<Eigen::Index>(nu.dim());
  const auto k = static_cast<Eigen::Index>(subspace_dim);

  Eigen::SelfAdjointEigenSolver<Matrix> es(detail::covariance(nu_c));
  // Decreasing eigenvalues; equal eigenvalues keep the solver's order
  // reversed, which is deterministic for a given input.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::reverse(order.begin(), order.end());
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return es.eigenvalues()(a) > es.eigenvalues()(b);
  });

  SubspaceResult out;
  out.eigenvalues.resize(d);
  Matrix u(d, k);
  for (Eigen::Index c = 0; c < d; ++c) {
    out.eigenvalues(c) = std::max(0.0, es.eigenvalues()(order[static_cast<std::size_t>(c)]));
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    Vector v = es.eigenvectors().col(order[static_cast<std::size_t>(c)]);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    u.col(c) = v;
  }
  out.basis = u;
  out.loadings = u * out.eigenvalues.head(k).cwiseSqrt().asDiagonal();

  const Matrix proj = nu_c.points() * u * u.transpose();
  const Vector resid = (nu_c.points() - proj).rowwise().squaredNorm();
  const double lost = nu_c.weights().dot(resid);
  out.noise_variance = k == d ? 0.0 : lost / static_cast<double>(d - k);

  const DiscreteMeasure mu_c(proj, nu_c.weights());
  SolveReport& r = out.report;
  r.domain = "subspace";
  r.iterations = 1;
  r.converged = true;
  r.variance = variance(mu_c);
  // The projection coupling is optimal: no coupling can move y closer to
  // the subspace than its orthogonal projection, so W2^2 is the lost mass
  // and the dominance inequality is tight.
  r.w2_squared = lost;
  r.kdr_slack = second_moment(nu_c) - second_moment(mu_c) - lost;
  r.coupling.mass = nu_c.weights().asDiagonal();
  r.transport = "analytic";
  r.domain_residuals["centering"] = barycenter(mu_c).cwiseAbs().maxCoeff();
  r.diagnostics["noise_variance"] = out.noise_variance;
  r.diagnostics["top_eigenvalue"] = out.eigenvalues(0);
  r.mu_star = translate(mu_c, shift);
  return out;
}

}  // namespace kdenoise
