// One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.
#include "kdenoise/datasets.hpp"
#include "kdenoise/dominance.hpp"
#include "kdenoise/rng.hpp"
#include "kdenoise/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <string>
#include <vector>

using namespace kdenoise;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
  void note(const std::string& s) {
    if (ok) detail = s;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

DiscreteMeasure make(const std::vector<std::vector<double>>& pts, const std::vector<double>& ws) {
  Matrix p(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts[0].size()));
  Vector w(p.rows());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t k = 0; k < pts[i].size(); ++k) {
      p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = pts[i][k];
    }
    w(static_cast<Eigen::Index>(i)) = ws[i];
  }
  return DiscreteMeasure(p, w);
}

DiscreteMeasure random_measure(Rng& rng, Eigen::Index m, Eigen::Index d, double spread = 3.0) {
  Matrix p(m, d);
  Vector w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) p(i, k) = rng.uniform(-spread, spread);
    w(i) = rng.uniform(0.1, 1.0);
  }
  return DiscreteMeasure(p, w / w.sum());
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Principal axis of a planar centered measure from the 2x2 closed form.
Vector planar_pc1(const DiscreteMeasure& nu) {
  const DiscreteMeasure c = center(nu);
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto a = c.atom(i);
    sxx += c.weight(i) * a(0) * a(0);
    syy += c.weight(i) * a(1) * a(1);
    sxy += c.weight(i) * a(0) * a(1);
  }
  const double th = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  Vector v(2);
  v << std::cos(th), std::sin(th);
  return v;
}

// ---- criteria ----------------------------------------------------------------

Outcome triple(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const DiscreteMeasure& th,
               const std::array<double, 3>& w2, const std::array<double, 3>& m2,
               const std::array<double, 3>* slack) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const std::array<std::pair<const DiscreteMeasure*, const DiscreteMeasure*>, 3> pairs{
      {{&mu, &nu}, {&nu, &th}, {&mu, &th}}};
  const std::array<bool, 3> verdicts{true, true, false};
  double w2_err = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double v = w2_squared(*pairs[k].first, *pairs[k].second).value;
    w2_err = std::max(w2_err, std::abs(v - w2[k]));
    const KdrVerdict kv = kdr_check(*pairs[k].first, *pairs[k].second);
    o.require(kv.dominated == verdicts[k], "verdict mismatch on pair " + std::to_string(k));
    if (slack) o.require(std::abs(kv.slack - (*slack)[k]) <= 1e-9, fmt("slack %g", kv.slack));
  }
  o.require(w2_err <= 1e-9, fmt("W2^2 error %g", w2_err));
  const std::array<const DiscreteMeasure*, 3> ms{&mu, &nu, &th};
  for (std::size_t k = 0; k < 3; ++k) {
    o.require(std::abs(second_moment(*ms[k]) - m2[k]) <= 1e-12, "second moment mismatch");
  }
  const double t = elapsed(t0);
  o.require(t < 1.0, fmt("runtime %.2f s", t));
  o.note(fmt("max W2^2 error %.1e, %.3f s", w2_err, t));
  return o;
}

Outcome counterexample_1d() {
  return triple(make({{-4}, {2}}, {1.0 / 3, 2.0 / 3}),
                make({{-4}, {0}, {4}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}),
                make({{-3}, {6}}, {2.0 / 3, 1.0 / 3}), {8.0 / 3, 14.0 / 3, 14.0},
                {8.0, 32.0 / 3, 18.0}, nullptr);
}

Outcome counterexample_2d() {
  const std::array<double, 3> slacks{0.0, 0.0, -2.0};
  return triple(make({{0, -1}, {0, 1}}, {0.5, 0.5}), make({{-1, -1}, {1, 1}}, {0.5, 0.5}),
                make({{-2, 0}, {2, 0}}, {0.5, 0.5}), {1.0, 2.0, 5.0}, {1.0, 2.0, 4.0}, &slacks);
}

Outcome instability() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteMeasure mu = make({{-1, 0}, {0, 0}, {1, 0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  double worst = 0.0;
  for (int n = 1; n <= 5; ++n) {
    const ConvexOrderVerdict v = is_convex_order(mu, generate({InstabilityKernel{n}, 0}));
    o.require(v.dominated && v.witness.has_value(), "nu_" + std::to_string(n) + " not dominated");
    if (v.witness) {
      const DiscreteMeasure nu = generate({InstabilityKernel{n}, 0});
      worst = std::max(worst, martingale_residual(*v.witness, mu, nu));
      worst = std::max(worst, marginal_residual(*v.witness, mu, nu));
    }
  }
  o.require(worst <= 1e-10, fmt("witness residual %g", worst));
  const DiscreteMeasure lim = generate({InstabilityKernel{std::nullopt}, 0});
  o.require(is_monotone_support(lim), "limit support not monotone");
  // Atoms -2, -1, 0, 1, 2 with weights 1/6, 1/6, 1/3, 1/6, 1/6: mean 0 and
  // second moment (4 + 1 + 0 + 1 + 4) / 6 = 5/3.
  o.require(std::abs(variance(lim) - 5.0 / 3.0) <= 1e-12, fmt("Var %.17g", variance(lim)));
  const double t = elapsed(t0);
  o.require(t < 1.0, fmt("runtime %.2f s", t));
  o.note(fmt("max witness residual %.1e, %.3f s", worst, t));
  return o;
}

Outcome supplement_a() {
  Outcome o;
  // Direct arithmetic on the two couplings, independent of the library.
  const double y[4][2] = {{0, 0}, {-3, 3}, {2, 2}, {-1, 5}};
  const double xk[2][2] = {{-1.5, 1.5}, {0.5, 3.5}};
  const double pk[2][4] = {{0.25, 0.25, 0, 0}, {0, 0, 0.25, 0.25}};
  const double xm[3][2] = {{-0.5, 0.5}, {-0.5, 2.5}, {-0.5, 4.5}};
  const double pm[3][4] = {{0.25, 0.05, 0, 0}, {0, 0.2, 0.2, 0}, {0, 0, 0.05, 0.25}};
  auto check = [&](const auto& x, const auto& p, int rows, double& cost, double& mart) {
    cost = 0.0;
    mart = 0.0;
    double col[4] = {0, 0, 0, 0};
    for (int i = 0; i < rows; ++i) {
      double mass = 0, b0 = 0, b1 = 0;
      for (int j = 0; j < 4; ++j) {
        const double d0 = x[i][0] - y[j][0];
        const double d1 = x[i][1] - y[j][1];
        cost += p[i][j] * (d0 * d0 + d1 * d1);
        mass += p[i][j];
        b0 += p[i][j] * y[j][0];
        b1 += p[i][j] * y[j][1];
        col[j] += p[i][j];
      }
      mart = std::max({mart, std::abs(b0 / mass - x[i][0]), std::abs(b1 / mass - x[i][1])});
    }
    for (double c : col) mart = std::max(mart, std::abs(c - 0.25));
  };
  double ck = 0, cm = 0, rk = 0, rm = 0;
  check(xk, pk, 2, ck, rk);
  check(xm, pm, 3, cm, rm);
  o.require(rk <= 1e-12 && rm <= 1e-12, fmt("martingale defect %g / %g", rk, rm));
  o.require(std::abs(ck - 4.5) <= 1e-12 && std::abs(cm - 4.1) <= 1e-12 && cm < ck,
            fmt("costs %.17g vs %.17g", ck, cm));
  // (Kram) on all ordered support pairs of pi_k, with c(u, v) the product
  // of coordinate differences; the quadratic in t is checked at the ends
  // and at its vertex.
  auto c = [](const double* u, const double* v) { return (u[0] - v[0]) * (u[1] - v[1]); };
  double margin = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (pk[a][b] == 0) continue;
      for (int e = 0; e < 2; ++e) {
        for (int f = 0; f < 4; ++f) {
          if (pk[e][f] == 0) continue;
          const double c01 = c(y[b], y[f]);
          const double c0 = c(xk[a], y[b]);
          const double c1 = c(xk[e], y[f]);
          std::vector<double> ts{0.0, 1.0};
          if (c01 != 0.0) ts.push_back(std::clamp(0.5 + (c0 - c1) / (2.0 * c01), 0.0, 1.0));
          for (double t : ts) margin = std::min(margin, t * (1 - t) * c01 - (1 - t) * c0 - t * c1);
        }
      }
    }
  }
  o.require(margin >= -1e-12, fmt("Kram margin %g", margin));
  const KramkovComparison lib = verify_kramkov_comparison();
  o.require(lib.passed && std::abs(lib.cost_k - ck) <= 1e-12 && std::abs(lib.cost_m - cm) <= 1e-12 &&
                std::abs(lib.kramkov_min_margin - margin) <= 1e-12,
            "library disagrees with the direct arithmetic");
  o.note(fmt("costs %.12g vs %.12g, min margin %g", ck, cm, margin));
  return o;
}

Outcome sinkhorn_vs_exact() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst_gap = 0.0;
  double worst_marg = 0.0;
  for (int t = 0; t < 50; ++t) {
    const DiscreteMeasure a = random_measure(rng, 50, 2);
    const DiscreteMeasure b = random_measure(rng, 50, 2);
    const Matrix cost = squared_distance_cost(a.points(), b.points());
    SinkhornConfig cfg;
    cfg.epsilon = 1e-3 * cost.mean();
    const TransportResult ent = sinkhorn(a, b, cost, cfg);
    const double exact = exact_ot(a, b, cost).value;
    worst_gap = std::max(worst_gap, std::abs(ent.value - exact) / cost.maxCoeff());
    worst_marg = std::max(worst_marg, marginal_l1_error(ent.coupling, a, b));
  }
  const double t = elapsed(t0);
  o.require(worst_gap <= 5e-2, fmt("gap %g x max cost", worst_gap));
  o.require(worst_marg <= 1e-6, fmt("marginal L1 %g", worst_marg));
  o.require(t < 30.0, fmt("runtime %.1f s", t));
  o.note(fmt("max gap %.1e x max cost, marginal %.1e, %.1f s", worst_gap, worst_marg, t));
  return o;
}

const DiscreteMeasure& step_data() {
  static const DiscreteMeasure nu = generate({StepCurve{300, 0.1}, 1});
  return nu;
}

Outcome cone_identity() {
  Outcome o;
  const DiscreteMeasure& nu = step_data();
  const double var_nu = variance(nu);
  SolverConfig cfg;
  cfg.seed = 1;
  cfg.exact_coupling_step = true;
  double worst_id = 0.0, worst_kkt = 0.0, slowest = 0.0;
  auto check = [&](const DomainSpec& dom, const std::string& name) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolveReport r = solve_cone_alternating(nu, dom, cfg);
    const double t = elapsed(t0);
    slowest = std::max(slowest, t);
    const double id = std::abs(r.variance + r.w2_squared - var_nu);
    worst_id = std::max(worst_id, id / var_nu);
    worst_kkt = std::max(worst_kkt, r.domain_residuals.at("step2_kkt"));
    o.require(r.converged, name + " did not converge");
    o.require(id <= 1e-3 * var_nu, name + fmt(" identity defect %g", id));
    o.require(r.domain_residuals.at("step2_kkt") <= 1e-6, name + " KKT residual");
    o.require(r.domain_residuals.at("sum_x") <= 1e-8, name + " atoms not centered");
    if (const auto* q = std::get_if<LengthSdRatio>(&dom)) {
      o.require(r.diagnostics.at("ratio") <= q->bound + 1e-4,
                name + fmt(" ratio %g", r.diagnostics.at("ratio")));
    }
    o.require(t < 300.0, name + fmt(" runtime %.1f s", t));
  };
  check(LengthSdRatio{100, 4.0}, "ratio B=4");
  check(LengthSdRatio{100, 6.0}, "ratio B=6");
  check(BoundedCurvature{100, 1e-6}, "curvature 1e-6");
  check(BoundedCurvature{100, 1e-5}, "curvature 1e-5");
  o.note(fmt("max identity defect %.1e Var, max KKT %.1e, slowest %.1f s", worst_id, worst_kkt,
             slowest));
  return o;
}

Outcome curvature_zero_pc1() {
  Outcome o;
  const DiscreteMeasure& nu = step_data();
  SolverConfig cfg;
  cfg.exact_coupling_step = true;
  const SolveReport r = solve_cone_alternating(nu, BoundedCurvature{nu.size(), kInfinity}, cfg);
  o.require(r.converged, "did not converge");
  const Matrix x = r.mu_star.points().rowwise() - r.mu_star.points().colwise().mean();
  // Direction of the (collinear) atoms: the farthest pair.
  Eigen::Index a = 0, b = 0;
  double far = -1.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index j = 0;
    const double d = (x.rowwise() - x.row(i)).rowwise().squaredNorm().maxCoeff(&j);
    if (d > far) {
      far = d;
      a = i;
      b = j;
    }
  }
  const Vector dir = (x.row(a) - x.row(b)).transpose().normalized();
  const Vector pc1 = planar_pc1(nu);
  const double angle = std::atan2(std::abs(dir(0) * pc1(1) - dir(1) * pc1(0)), std::abs(dir.dot(pc1)));
  o.require(angle <= 1e-3, fmt("angle %g rad", angle));
  o.note(fmt("angle to PC1 %.1e rad", angle));
  return o;
}

Outcome pca_factor() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  // Orthogonal loading columns (1,1,1,1,1)/sqrt(5) * sqrt(2) and
  // (1,-1,0,1,-1)/2, written out here rather than taken from the library.
  Matrix l(5, 2);
  const double a = std::sqrt(2.0 / 5.0);
  l << a, 0.5, a, -0.5, a, 0.0, a, 0.5, a, -0.5;
  o.require((default_factor_loadings() - l).cwiseAbs().maxCoeff() <= 1e-15, "loadings differ");
  FactorModel f;
  f.loadings = l;
  f.sigma = 0.5;
  f.n = 20000;
  const DiscreteMeasure nu = generate({f, 1});
  const SubspaceResult s = solve_subspace(nu, 2);
  const Matrix est =
      s.loadings * s.loadings.transpose() - s.noise_variance * s.basis * s.basis.transpose();
  const double err = (est - l * l.transpose()).norm();
  const double t = elapsed(t0);
  o.require(err <= 0.1, fmt("loading error %g", err));
  o.require(std::abs(s.noise_variance - 0.25) <= 0.05, fmt("noise variance %g", s.noise_variance));
  o.require(t < 60.0, fmt("runtime %.1f s", t));
  o.note(fmt("loading error %.3f, sigma_n^2 %.4f, %.1f s", err, s.noise_variance, t));
  return o;
}

Outcome robustness() {
  Outcome o;
  Rng rng(77);
  double worst_c = -kInfinity, worst_k = -kInfinity;
  for (int t = 0; t < 100; ++t) {
    // Convex order: nu splits every atom of rho symmetrically, so rho is
    // dominated by nu. The domain is "at most m atoms"; Lloyd started at
    // rho keeps the variance at least Var(rho), which is all the bound uses.
    const auto m = static_cast<Eigen::Index>(2 + t % 3);
    const DiscreteMeasure rho = random_measure(rng, m, 2);
    Matrix p(2 * m, 2);
    Vector w(2 * m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double s = rng.uniform(0.01, 0.5);
      Vector z(2);
      z << s * rng.normal(), s * rng.normal();
      p.row(2 * i) = rho.atom(static_cast<std::size_t>(i)).transpose() + z.transpose();
      p.row(2 * i + 1) = rho.atom(static_cast<std::size_t>(i)).transpose() - z.transpose();
      w(2 * i) = w(2 * i + 1) = 0.5 * rho.weights()(i);
    }
    const DiscreteMeasure nu(p, w);
    SolverConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(t);
    const SolveReport r = solve_discrete_support(nu, DiscreteSupport{static_cast<std::size_t>(m),
                                                                     std::nullopt},
                                                 cfg, {rho.points()});
    const double lhs = std::sqrt(std::max(0.0, w2_squared(r.mu_star, rho).value));
    const double rhs = std::sqrt(std::max(0.0, variance(nu) - variance(rho))) +
                       std::sqrt(std::max(0.0, w2_squared(nu, rho).value));
    worst_c = std::max(worst_c, lhs - rhs);
    o.require(is_convex_order(r.mu_star, nu).dominated, "Lloyd solution not in convex order");

    // Kantorovich dominance: nu centered, the domain is measures on a line,
    // rho a contraction of the projection of nu onto a random line.
    DiscreteMeasure nuk = center(random_measure(rng, 8, 2));
    Vector v(2);
    v << rng.normal(), rng.normal();
    v.normalize();
    const double lam = rng.uniform(0.2, 1.0);
    const Matrix proj = lam * (nuk.points() * v) * v.transpose();
    const DiscreteMeasure rhok(proj, nuk.weights());
    o.require(kdr_check(rhok, nuk).dominated, "constructed rho not dominated");
    const SubspaceResult s = solve_subspace(nuk, 1);
    const double lk = std::sqrt(std::max(0.0, w2_squared(s.report.mu_star, rhok).value));
    const double rk = std::sqrt(std::max(0.0, second_moment(nuk) - second_moment(rhok))) +
                      std::sqrt(std::max(0.0, w2_squared(nuk, rhok).value));
    worst_k = std::max(worst_k, lk - rk);
  }
  o.require(worst_c <= 1e-6, fmt("convex-order bound violated by %g", worst_c));
  o.require(worst_k <= 1e-6, fmt("Kantorovich bound violated by %g", worst_k));
  o.note(fmt("max lhs - rhs: convex %.3g, Kantorovich %.3g", worst_c, worst_k));
  return o;
}

Outcome moment_bound() {
  Outcome o;
  Rng rng(31);
  int pairs = 0;
  int tries = 0;
  double worst = -kInfinity;
  while (pairs < 100 && tries < 10000) {
    ++tries;
    const DiscreteMeasure nu = center(random_measure(rng, 10, 2));
    // Half the candidates are convex-order images (barycenters of a random
    // partition), half are arbitrary measures rescaled toward the origin.
    DiscreteMeasure mu = nu;
    if (tries % 2 == 0) {
      const auto k = static_cast<Eigen::Index>(1 + rng.index(4));
      Matrix c = Matrix::Zero(k, 2);
      Vector w = Vector::Zero(k);
      for (std::size_t j = 0; j < nu.size(); ++j) {
        const auto g = static_cast<Eigen::Index>(rng.index(static_cast<std::uint64_t>(k)));
        c.row(g) += nu.weight(j) * nu.atom(j).transpose();
        w(g) += nu.weight(j);
      }
      std::vector<Eigen::Index> keep;
      for (Eigen::Index g = 0; g < k; ++g) {
        if (w(g) > 0.0) keep.push_back(g);
      }
      Matrix cp(static_cast<Eigen::Index>(keep.size()), 2);
      Vector wp(cp.rows());
      for (std::size_t i = 0; i < keep.size(); ++i) {
        cp.row(static_cast<Eigen::Index>(i)) = c.row(keep[i]) / w(keep[i]);
        wp(static_cast<Eigen::Index>(i)) = w(keep[i]);
      }
      mu = DiscreteMeasure(cp, wp);
    } else {
      mu = dilate(random_measure(rng, 4, 2), rng.uniform(0.05, 1.5));
    }
    if (!kdr_check(mu, nu).dominated) continue;
    ++pairs;
    const double m2 = second_moment(nu);
    for (int g = 0; g < 20; ++g) {
      const double alpha = 0.05 * std::pow(1.5, g);
      double mass = 0.0;
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (mu.atom(i).squaredNorm() >= alpha) mass += mu.weight(i);
      }
      worst = std::max(worst, mass - m2 / alpha);
    }
  }
  o.require(pairs == 100, "only " + std::to_string(pairs) + " dominated pairs");
  o.require(worst <= 1e-10, fmt("bound violated by %g", worst));
  o.note(std::to_string(pairs) + fmt(" pairs, max excess %.3g", worst));
  return o;
}

Outcome lloyd_suite() {
  Outcome o;
  Rng rng(12);
  const DiscreteMeasure nu = random_measure(rng, 9, 2);
  const SolveReport one = solve_discrete_support(nu, DiscreteSupport{1, std::nullopt});
  o.require(one.mu_star.size() == 1 && (one.mu_star.atom(0) - barycenter(nu)).norm() <= 1e-12,
            "m = 1 is not the barycenter");
  const SolveReport all = solve_discrete_support(nu, DiscreteSupport{9, std::nullopt});
  o.require(w2_squared(all.mu_star, nu).value <= 1e-12, "m = n does not return nu");
  o.require(is_convex_order(all.mu_star, nu).dominated, "m = n not in convex order");

  const DiscreteMeasure line = make({{0}, {1}, {10}, {11}}, {0.25, 0.25, 0.25, 0.25});
  const SolveReport two = solve_discrete_support(line, DiscreteSupport{2, std::nullopt});
  // Oracle: the best of all 2-partitions of {0, 1, 10, 11}.
  const double ys[4] = {0, 1, 10, 11};
  double best = kInfinity;
  for (int mask = 1; mask < 15; ++mask) {
    double cost = 0.0;
    for (int side = 0; side < 2; ++side) {
      double s = 0;
      int c = 0;
      for (int i = 0; i < 4; ++i) {
        if (((mask >> i) & 1) == side) s += ys[i], ++c;
      }
      for (int i = 0; i < 4; ++i) {
        if (((mask >> i) & 1) == side) cost += 0.25 * (ys[i] - s / c) * (ys[i] - s / c);
      }
    }
    best = std::min(best, cost);
  }
  std::vector<double> centers;
  for (std::size_t i = 0; i < two.mu_star.size(); ++i) centers.push_back(two.mu_star.atom(i)(0));
  std::sort(centers.begin(), centers.end());
  o.require(centers.size() == 2 && std::abs(centers[0] - 0.5) <= 1e-10 &&
                std::abs(centers[1] - 10.5) <= 1e-10,
            "centers are not {0.5, 10.5}");
  o.require(std::abs(two.w2_squared - 0.25) <= 1e-10 && std::abs(best - 0.25) <= 1e-15,
            fmt("W2^2 %g (oracle %g)", two.w2_squared, best));
  o.require(is_convex_order(two.mu_star, line).dominated, "fixed point not in convex order");
  for (int t = 0; t < 5; ++t) {
    const DiscreteMeasure r = random_measure(rng, 15, 2);
    const SolveReport s = solve_discrete_support(r, DiscreteSupport{3, std::nullopt});
    o.require(is_convex_order(s.mu_star, r).dominated, "random fixed point not in convex order");
  }
  o.note(fmt("W2^2 %.12g", two.w2_squared));
  return o;
}

Outcome parabola() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const DiscreteMeasure nu = generate({Parabola{2000, 0.1}, 1});
  SolverConfig cfg;
  cfg.seed = 1;
  const SolveReport r = solve_bounded_length(nu, BoundedLength{10, 4.0, true}, cfg);
  const double t = elapsed(t0);
  const double len = curve_length(r.mu_star.points());
  o.require(r.converged, "did not converge");
  o.require(t < 120.0, fmt("runtime %.1f s", t));
  o.require(len <= 4.0 + 1e-6, fmt("length %g", len));
  o.require(r.kdr_slack >= -1e-3 * variance(nu), fmt("slack %g", r.kdr_slack));
  o.require(std::abs(r.mu_star.weights().sum() - 1.0) <= 1e-6, "weights do not sum to 1");
  o.note(fmt("length %.4f, slack %.2e, %.1f s", len, r.kdr_slack, t));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"counterexample_1d", counterexample_1d},
      {"counterexample_2d", counterexample_2d},
      {"instability", instability},
      {"supplement_a", supplement_a},
      {"sinkhorn_vs_exact", sinkhorn_vs_exact},
      {"cone_identity", cone_identity},
      {"curvature_zero_pc1", curvature_zero_pc1},
      {"pca_factor", pca_factor},
      {"robustness_bounds", robustness},
      {"moment_bound", moment_bound},
      {"lloyd_suite", lloyd_suite},
      {"bounded_length_parabola", parabola},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.ok) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
