#pragma once

#include "kdenoise/domain.hpp"
#include "kdenoise/measure.hpp"
#include "kdenoise/transport.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace kdenoise {

/// Step sizes for the projected multiplier updates of the bounded-length
/// Lagrangian; each is decayed by 1/sqrt(t).
struct MultiplierSteps {
  double lambda1 = 1e-2;
  double lambda1_i = 1e-2;
  double lambda2 = 1.0;
  double lambda3 = 1.0;
};

struct SolverConfig {
  std::size_t max_outer_iter = 20000;
  double step_size_x = 0.5;
  double step_size_u = 0.05;
  MultiplierSteps multiplier_step_sizes;
  /// Entropic inner solver. Inside the solvers `sinkhorn.epsilon` is relative:
  /// the regularization used is epsilon times the mean absolute cost entry.
  SinkhornConfig sinkhorn{5e-2, 10000, 1e-6, true};
  /// Use the exact kernel instead of Sinkhorn for the coupling step of the
  /// cone solver.
  bool exact_coupling_step = false;
  /// Partial-update weight of the curvature inner loop.
  double mixing = 0.1;
  double convergence_tol = 1e-6;
  std::uint64_t seed = 0;
  /// Independent k-means++ starts for the clustering solvers.
  std::size_t restarts = 8;
  /// Optional starting atoms (m x d, in the original coordinates).
  std::optional<Matrix> initial_atoms;

  /// Throws Error(kInvalidConfig).
  void validate() const;
};

struct SolveReport {
  std::string domain;
  DiscreteMeasure mu_star = DiscreteMeasure::dirac(Vector::Zero(1));
  /// Coupling of mu_star and nu: the solver's own coupling when it produces
  /// one (martingale couplings for the clustering solvers), otherwise the
  /// exact maximal-correlation coupling.
  Coupling coupling;
  double variance = 0.0;
  double w2_squared = 0.0;
  /// Kantorovich slack of (mu_star, nu) in the Wasserstein form; >= 0 means
  /// dominated.
  double kdr_slack = 0.0;
  /// Constraint and stationarity residuals (length excess, ratio excess,
  /// centering, KKT residuals...).
  std::map<std::string, double> domain_residuals;
  /// Other scalars worth reporting (multipliers, scalings, noise variance).
  std::map<std::string, double> diagnostics;
  std::vector<double> objective_history;
  std::size_t iterations = 0;
  bool converged = false;
  /// is_convex_order(mu_star, nu) when it was evaluated.
  std::optional<bool> convex_order;
  std::uint64_t seed = 0;
  /// "exact" when w2_squared and kdr_slack come from the exact kernel.
  std::string transport = "exact";
};

/// Maximizes the variance over the domain subject to Kantorovich dominance
/// of nu, dispatching on the domain. nu is centered internally and the
/// solution translated back.
SolveReport solve_kdr(const DiscreteMeasure& nu, const DomainSpec& domain,
                      const SolverConfig& cfg = {});

/// Primal-dual gradient method on the bounded-length Lagrangian with a
/// Sinkhorn coupling step, followed by a feasibility pass that contracts
/// the iterate (length, then dominance) when needed.
SolveReport solve_bounded_length(const DiscreteMeasure& nu, const BoundedLength& domain,
                                 const SolverConfig& cfg = {});

/// Alternating coupling / position scheme for the cone domains
/// (LengthSdRatio, BoundedCurvature). The final atoms are rescaled by the
/// maximal-correlation ratio so that the dominance inequality is tight.
SolveReport solve_cone_alternating(const DiscreteMeasure& nu, const DomainSpec& domain,
                                   const SolverConfig& cfg = {});

struct Step2Result {
  Matrix x;
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// Warm-start state for repeated ratio steps.
struct Step2RatioState {
  Matrix z;
  Matrix w;
  double rho = 0.0;
};

/// max sum_i <x_i, ybar_i>  s.t.  sum_i x_i = 0, sum_i |x_i|^2 <= 1,
/// sum_i |x_{i+1} - x_i| <= bound, by ADMM on the splitting z = Dx. The
/// reported KKT residual is max(primal, dual) in units where the centered
/// ybar has unit norm.
Step2Result step2_ratio(const Matrix& y_bar, double bound, double tol = 1e-6,
                        Step2RatioState* warm = nullptr);

/// Same objective and centering constraint on the unit sphere with the
/// length bound: maximizes <x, ybar> - rho * length(x) over the ball and
/// bisects on rho until the length is at most `bound`. Returns x = 0 when no
/// nonzero curve fits the bound.
Step2Result step2_ratio_sphere(const Matrix& y_bar, double bound, double tol = 1e-6);

struct CurvatureStepResult {
  Matrix x;
  double fixed_point_change = 0.0;
  /// Stationarity defect of the last closed-form solve.
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
  /// All c_i equal: x_prev returned unchanged.
  bool degenerate = false;
};

/// Closed-form maximizer of sum_i <x_i, c_i> under sum_i x_i = 0 and
/// sum_i |x_i|^2 = m. Returns nullopt when all c_i coincide.
std::optional<Matrix> curvature_linear_maximizer(const Matrix& c);

/// Linearized curvature-penalty direction phi_i (zero at both endpoints).
Matrix curvature_gradient(const Matrix& x);

/// Total curvature sum_{i=2}^{m-1} cos^2(theta_i / 2) = (1/4) sum |e_i|^2.
double total_curvature(const Matrix& x);

/// Inner loop of the curvature step: repeated closed-form solves with
/// partial updates x <- mixing * xhat + (1 - mixing) * x until the sup-change
/// is at most 1e-8. The returned x is the last closed-form solution.
CurvatureStepResult step2_curvature(const Matrix& y_bar, double lambda, const Matrix& x_prev,
                                    const SolverConfig& cfg = {});

struct SubspaceResult {
  SolveReport report;
  /// d x k orthonormal basis of the fitted subspace (columns by decreasing
  /// eigenvalue).
  Matrix basis;
  Vector eigenvalues;  // all d covariance eigenvalues, decreasing
  /// U Lambda^{1/2} restricted to the top k eigenpairs.
  Matrix loadings;
  /// (1/(d-k)) int |y - U U^T y|^2 dnu; 0 when k = d.
  double noise_variance = 0.0;
};

/// Orthogonal projection of nu onto its top principal subspace.
SubspaceResult solve_subspace(const DiscreteMeasure& nu, std::size_t subspace_dim);

/// Lloyd iteration (k-means) with k-means++ restarts. With fixed weights
/// the assignment step is exact optimal transport. The returned coupling
/// is a martingale coupling of the fixed point. Each entry of
/// `initial_centers` (m x d) is tried as an extra start.
SolveReport solve_discrete_support(const DiscreteMeasure& nu, const DiscreteSupport& domain,
                                   const SolverConfig& cfg = {},
                                   const std::vector<Matrix>& initial_centers = {});

/// Generalized Lloyd iteration over (atoms, coupling) minimizing the
/// quadratic cost plus a quadratic penalty on the conditional-mean defect,
/// continued over increasing penalty weights, plus the domain penalty
/// (monotone chain or length excess). Attaches is_convex_order(mu*, nu).
SolveReport solve_convex_order_penalty(const DiscreteMeasure& nu, const DomainSpec& domain,
                                       const SolverConfig& cfg = {});

struct KramkovComparison {
  double martingale_residual_k = 0.0;
  double martingale_residual_m = 0.0;
  double marginal_residual_k = 0.0;
  double marginal_residual_m = 0.0;
  /// Smallest value of t(1-t)c(y0,y1) - (1-t)c(x0,y0) - t c(x1,y1) over
  /// t in [0,1] and ordered support pairs of pi_k.
  double kramkov_min_margin = 0.0;
  bool kramkov_holds = false;
  double cost_k = 0.0;  // E|X - Y|^2 under pi_k
  double cost_m = 0.0;  // E|X - Y|^2 under pi_m
  double variance_gap_k = 0.0;  // Var(nu) - Var(mu_k)
  double variance_gap_m = 0.0;  // Var(nu) - Var(mu_m)
  bool passed = false;
};

/// Checks the hard-coded comparison between the optimizer for the
/// product cost (u1 - v1)(u2 - v2) and a better quadratic-cost martingale
/// coupling on the same four-point target.
KramkovComparison verify_kramkov_comparison();

}  // namespace kdenoise
