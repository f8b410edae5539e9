#include "commands.hpp"

#include "kdenoise/datasets.hpp"
#include "kdenoise/dominance.hpp"
#include "kdenoise/error.hpp"
#include "kdenoise/report_json.hpp"
#include "kdenoise/solvers.hpp"

#include <CLI11.hpp>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <json.hpp>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <utility>

namespace kdenoise::cli {

namespace {

using nlohmann::json;

struct Globals {
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string format = "json";
};

// Named boolean assertions; the exit code is 0 iff all hold.
struct Checks {
  json values = json::object();
  std::vector<std::string> failed;

  void add(const std::string& name, bool ok) {
    values[name] = ok;
    if (!ok) failed.push_back(name);
  }
  bool passed() const { return failed.empty(); }
};

struct Result {
  json doc = json::object();
  Checks checks;
  // Written whenever --out is given (the plotting script needs the data).
  std::optional<DiscreteMeasure> data;
  // Written only with --format csv.
  std::vector<std::pair<std::string, DiscreteMeasure>> measures;
  std::vector<std::pair<std::string, Coupling>> couplings;
};

std::string label(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::ofstream open_file(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + p.string());
  return f;
}

void emit(Result& r, const std::string& stem, const Globals& g, std::ostream& out) {
  r.doc["schema"] = kReportSchema;
  r.doc["seed"] = g.seed;
  r.doc["checks"] = r.checks.values;
  r.doc["passed"] = r.checks.passed();
  if (g.out_dir.empty()) {
    out << dump(r.doc);
    return;
  }
  const std::filesystem::path dir(g.out_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  open_file(dir / (stem + ".json")) << dump(r.doc);
  if (r.data) {
    auto f = open_file(dir / (stem + "_data.csv"));
    write_measure_csv(f, *r.data);
  }
  if (g.format != "csv") return;
  for (const auto& [name, mu] : r.measures) {
    auto f = open_file(dir / (stem + "_" + name + ".csv"));
    write_measure_csv(f, mu);
  }
  for (const auto& [name, pi] : r.couplings) {
    auto f = open_file(dir / (stem + "_" + name + ".csv"));
    write_coupling_csv(f, pi);
  }
}

DiscreteMeasure measure(std::initializer_list<std::initializer_list<double>> pts,
                        std::initializer_list<double> ws) {
  Matrix p(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(pts.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : pts) {
    Eigen::Index k = 0;
    for (double v : row) p(i, k++) = v;
    ++i;
  }
  Vector w(p.rows());
  i = 0;
  for (double v : ws) w(i++) = v;
  return DiscreteMeasure(p, w);
}

// Var(mu*) + W2^2(mu*, nu) - Var(nu), which vanishes at a tight dominance
// point.
double identity_defect(const SolveReport& r, const DiscreteMeasure& nu) {
  return r.variance + r.w2_squared - variance(nu);
}

// ---- plain commands -------------------------------------------------------

struct PairOptions {
  std::string mu;
  std::string nu;
  double epsilon = 0.0;
  std::string expect;
};

Result cmd_w2(const PairOptions& o) {
  const DiscreteMeasure mu = load_measure_csv(o.mu);
  const DiscreteMeasure nu = load_measure_csv(o.nu);
  Result r;
  TransportResult t;
  if (o.epsilon > 0.0) {
    const Matrix cost = squared_distance_cost(mu.points(), nu.points());
    SinkhornConfig sc;
    sc.epsilon = o.epsilon * cost.cwiseAbs().mean();
    t = sinkhorn(mu, nu, cost, sc);
    r.doc["method"] = "entropic";
    r.doc["epsilon"] = number(sc.epsilon);
    r.doc["marginal_error_before_rounding"] = number(t.marginal_error_before_rounding);
  } else {
    t = w2_squared(mu, nu);
    r.doc["method"] = "exact";
  }
  r.doc["command"] = "w2";
  r.doc["w2_squared"] = number(t.value);
  r.doc["iterations"] = t.iterations;
  r.checks.add("converged", t.converged);
  r.couplings.emplace_back("coupling", t.coupling);
  return r;
}

void check_expectation(Checks& c, const std::string& expect, bool dominated) {
  if (expect.empty()) return;
  c.add("expected_verdict", (expect == "dominated") == dominated);
}

Result cmd_check_order(const PairOptions& o) {
  const DiscreteMeasure mu = load_measure_csv(o.mu);
  const DiscreteMeasure nu = load_measure_csv(o.nu);
  const ConvexOrderVerdict v = is_convex_order(mu, nu);
  Result r;
  r.doc = verdict_to_json(v);
  r.doc["command"] = "check-order";
  check_expectation(r.checks, o.expect, v.dominated);
  if (v.witness) r.couplings.emplace_back("coupling", *v.witness);
  return r;
}

Result cmd_check_kdr(const PairOptions& o) {
  const DiscreteMeasure mu = load_measure_csv(o.mu);
  const DiscreteMeasure nu = load_measure_csv(o.nu);
  const KdrVerdict v = kdr_check(mu, nu);
  Result r;
  r.doc = verdict_to_json(v);
  r.doc["command"] = "check-kdr";
  check_expectation(r.checks, o.expect, v.dominated);
  r.couplings.emplace_back("coupling", v.witness);
  return r;
}

struct DenoiseOptions {
  std::string nu;
  std::string domain;
  std::optional<std::size_t> m;
  std::optional<double> bound;
  std::optional<double> penalty;
  std::optional<double> epsilon;
  std::optional<std::size_t> max_iter;
  std::string order = "kdr";
  bool exact = false;
  std::size_t restarts = 8;
};

DomainSpec make_domain(const DenoiseOptions& o) {
  const std::string& n = o.domain;
  if (n == "bounded-length") {
    BoundedLength d;
    d.m = o.m.value_or(d.m);
    d.bound = o.bound.value_or(d.bound);
    return d;
  }
  if (n == "ratio") {
    LengthSdRatio d;
    d.m = o.m.value_or(d.m);
    d.bound = o.bound.value_or(d.bound);
    return d;
  }
  if (n == "curvature") {
    BoundedCurvature d;
    d.m = o.m.value_or(d.m);
    d.curvature_penalty = o.penalty.value_or(d.curvature_penalty);
    return d;
  }
  if (n == "subspace") return Subspace{o.m.value_or(1)};
  if (n == "discrete") return DiscreteSupport{o.m.value_or(2), std::nullopt};
  if (n == "monotone") {
    MonotonePenalty d;
    d.m = o.m.value_or(d.m);
    d.penalty_weight = o.penalty.value_or(d.penalty_weight);
    return d;
  }
  throw Error(ErrorCode::kInvalidDomain, "unknown domain " + n);
}

Result cmd_denoise(const DenoiseOptions& o, const Globals& g) {
  const DiscreteMeasure nu = load_measure_csv(o.nu);
  const DomainSpec domain = make_domain(o);
  SolverConfig cfg;
  cfg.seed = g.seed;
  cfg.exact_coupling_step = o.exact;
  cfg.restarts = o.restarts;
  if (o.epsilon) cfg.sinkhorn.epsilon = *o.epsilon;
  if (o.max_iter) cfg.max_outer_iter = *o.max_iter;
  const SolveReport rep = o.order == "convex" ? solve_convex_order_penalty(nu, domain, cfg)
                                              : solve_kdr(nu, domain, cfg);
  Result r;
  r.doc = report_to_json(rep, cfg);
  r.doc["command"] = "denoise";
  r.doc["order"] = o.order;
  r.checks.add("converged", rep.converged);
  r.checks.add("kdr_feasible", rep.kdr_slack >= -1e-6 * std::max(1.0, second_moment(nu)));
  if (rep.convex_order) r.checks.add("convex_order", *rep.convex_order);
  r.measures.emplace_back("mu_star", rep.mu_star);
  r.couplings.emplace_back("coupling", rep.coupling);
  return r;
}

// ---- reproductions --------------------------------------------------------

struct ReproOptions {
  std::string experiment;
  std::optional<std::size_t> n;
  std::optional<std::size_t> m;
  std::vector<double> bounds;
  std::vector<double> penalties;
  std::optional<double> sigma;
  std::optional<std::size_t> max_iter;
  bool entropic = false;
  bool convex_order = false;
};

void add_triple(Result& r, const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                const DiscreteMeasure& theta, const std::array<double, 3>& w2_expected,
                const std::array<double, 3>& m2_expected,
                const std::optional<std::array<double, 3>>& slack_expected) {
  const std::array<const DiscreteMeasure*, 3> ms{&mu, &nu, &theta};
  const std::array<std::string, 3> names{"mu", "nu", "theta"};
  const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {1, 2}, {0, 2}}};
  const std::array<bool, 3> verdict_expected{true, true, false};
  json pair_docs = json::object();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto [a, b] = pairs[k];
    const std::string key = names[a] + "_" + names[b];
    const double w2 = w2_squared(*ms[a], *ms[b]).value;
    const KdrVerdict v = kdr_check(*ms[a], *ms[b]);
    json j = verdict_to_json(v);
    j["w2_squared"] = number(w2);
    pair_docs[key] = j;
    r.checks.add(key + ".w2_squared", std::abs(w2 - w2_expected[k]) <= 1e-9);
    r.checks.add(key + ".verdict", v.dominated == verdict_expected[k]);
    if (slack_expected) r.checks.add(key + ".slack", std::abs(v.slack - (*slack_expected)[k]) <= 1e-9);
  }
  json moments = json::object();
  for (std::size_t k = 0; k < 3; ++k) {
    const double m2 = second_moment(*ms[k]);
    moments[names[k]] = number(m2);
    r.checks.add(names[k] + ".second_moment", std::abs(m2 - m2_expected[k]) <= 1e-12);
    r.measures.emplace_back(names[k], *ms[k]);
  }
  r.doc["pairs"] = pair_docs;
  r.doc["second_moments"] = moments;
}

Result repro_counterexample_1d() {
  Result r;
  add_triple(r, measure({{-4}, {2}}, {1.0 / 3, 2.0 / 3}),
             measure({{-4}, {0}, {4}}, {1.0 / 3, 1.0 / 3, 1.0 / 3}),
             measure({{-3}, {6}}, {2.0 / 3, 1.0 / 3}), {8.0 / 3, 14.0 / 3, 14.0},
             {8.0, 32.0 / 3, 18.0}, std::nullopt);
  return r;
}

Result repro_counterexample_2d() {
  Result r;
  add_triple(r, measure({{0, -1}, {0, 1}}, {0.5, 0.5}), measure({{-1, -1}, {1, 1}}, {0.5, 0.5}),
             measure({{-2, 0}, {2, 0}}, {0.5, 0.5}), {1.0, 2.0, 5.0}, {1.0, 2.0, 4.0},
             std::array<double, 3>{0.0, 0.0, -2.0});
  return r;
}

Result repro_instability(const Globals& g) {
  Result r;
  const DiscreteMeasure mu = measure({{-1, 0}, {0, 0}, {1, 0}}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  json kernels = json::object();
  for (int n = 1; n <= 5; ++n) {
    const DiscreteMeasure nu = generate({InstabilityKernel{n}, g.seed});
    const ConvexOrderVerdict v = is_convex_order(mu, nu);
    kernels[std::to_string(n)] = verdict_to_json(v);
    r.checks.add("nu_" + std::to_string(n) + ".dominated", v.dominated && v.max_residual <= 1e-10);
  }
  const DiscreteMeasure limit = generate({InstabilityKernel{std::nullopt}, g.seed});
  r.doc["kernels"] = kernels;
  r.doc["limit"] = {{"monotone_support", is_monotone_support(limit)},
                    {"variance", number(variance(limit))}};
  r.checks.add("nu_inf.monotone_support", is_monotone_support(limit));
  r.checks.add("nu_inf.variance", std::abs(variance(limit) - 5.0 / 3.0) <= 1e-12);

  // The monotone domain recovers mu from nu_1 under the convex order.
  SolverConfig cfg;
  cfg.seed = g.seed;
  const DiscreteMeasure nu1 = generate({InstabilityKernel{1}, g.seed});
  const SolveReport rep = solve_convex_order_penalty(nu1, MonotonePenalty{}, cfg);
  r.doc["monotone_solve"] = report_to_json(rep, cfg);
  r.checks.add("monotone_solve.convex_order", rep.convex_order.value_or(false));
  r.checks.add("monotone_solve.recovers_mu", w2_squared(rep.mu_star, mu).value <= 1e-8);
  r.measures.emplace_back("nu_1", nu1);
  r.measures.emplace_back("nu_inf", limit);
  r.measures.emplace_back("mu_star", rep.mu_star);
  return r;
}

Result repro_supplement_a() {
  const KramkovComparison k = verify_kramkov_comparison();
  Result r;
  r.doc["martingale_residual_k"] = number(k.martingale_residual_k);
  r.doc["martingale_residual_m"] = number(k.martingale_residual_m);
  r.doc["marginal_residual_k"] = number(k.marginal_residual_k);
  r.doc["marginal_residual_m"] = number(k.marginal_residual_m);
  r.doc["kramkov_min_margin"] = number(k.kramkov_min_margin);
  r.doc["cost_k"] = number(k.cost_k);
  r.doc["cost_m"] = number(k.cost_m);
  r.doc["variance_gap_k"] = number(k.variance_gap_k);
  r.doc["variance_gap_m"] = number(k.variance_gap_m);
  r.checks.add("martingale", k.martingale_residual_k <= 1e-12 && k.martingale_residual_m <= 1e-12 &&
                                 k.marginal_residual_k <= 1e-12 && k.marginal_residual_m <= 1e-12);
  r.checks.add("kramkov_holds", k.kramkov_holds);
  r.checks.add("cost_k", std::abs(k.cost_k - 4.5) <= 1e-12);
  r.checks.add("cost_m", std::abs(k.cost_m - 4.1) <= 1e-12);
  r.checks.add("cost_m_below_cost_k", k.cost_m < k.cost_k);
  return r;
}

SolverConfig repro_config(const ReproOptions& o, const Globals& g) {
  SolverConfig cfg;
  cfg.seed = g.seed;
  if (o.max_iter) cfg.max_outer_iter = *o.max_iter;
  return cfg;
}

void add_run(Result& r, json& runs, const std::string& key, const SolveReport& rep,
             const SolverConfig& cfg) {
  runs[key] = report_to_json(rep, cfg);
  r.measures.emplace_back("mu_star_" + key, rep.mu_star);
  r.couplings.emplace_back("coupling_" + key, rep.coupling);
}

Result repro_parabola(const ReproOptions& o, const Globals& g) {
  Parabola spec;
  spec.n = o.n.value_or(spec.n);
  spec.noise_sigma = o.sigma.value_or(spec.noise_sigma);
  const DiscreteMeasure nu = generate({spec, g.seed});
  const double var_nu = variance(nu);
  const SolverConfig cfg = repro_config(o, g);
  Result r;
  r.data = nu;
  json runs = json::object();
  for (double b : o.bounds.empty() ? std::vector<double>{4.0} : o.bounds) {
    const BoundedLength dom{o.m.value_or(10), b, true};
    const SolveReport rep = solve_bounded_length(nu, dom, cfg);
    const std::string key = "bound_" + label(b);
    add_run(r, runs, key, rep, cfg);
    r.checks.add(key + ".converged", rep.converged);
    r.checks.add(key + ".length", curve_length(rep.mu_star.points()) <= b + 1e-6);
    r.checks.add(key + ".kdr_slack", rep.kdr_slack >= -1e-3 * var_nu);
    r.checks.add(key + ".weight_sum", std::abs(rep.mu_star.weights().sum() - 1.0) <= 1e-6);
    if (o.convex_order) {
      SolverConfig ccfg = cfg;
      ccfg.restarts = 2;
      ccfg.initial_atoms = rep.mu_star.points();
      const SolveReport crep = solve_convex_order_penalty(nu, dom, ccfg);
      const std::string ckey = "convex_" + key;
      add_run(r, runs, ckey, crep, ccfg);
      r.checks.add(ckey + ".length", curve_length(crep.mu_star.points()) <= b + 1e-6);
      r.checks.add(ckey + ".convex_order", crep.convex_order.value_or(false));
    }
  }
  r.doc["runs"] = runs;
  r.doc["data_variance"] = number(var_nu);
  return r;
}

void add_cone_checks(Result& r, const std::string& key, const SolveReport& rep,
                     const DiscreteMeasure& nu) {
  const double var_nu = variance(nu);
  r.checks.add(key + ".converged", rep.converged);
  r.checks.add(key + ".identity", std::abs(identity_defect(rep, nu)) <= 1e-3 * var_nu);
  r.checks.add(key + ".kkt", rep.domain_residuals.at("step2_kkt") <= 1e-6);
  r.checks.add(key + ".centered", rep.domain_residuals.at("sum_x") <= 1e-8);
}

DiscreteMeasure step_data(const ReproOptions& o, const Globals& g) {
  StepCurve spec;
  spec.n = o.n.value_or(spec.n);
  spec.noise_sigma = o.sigma.value_or(spec.noise_sigma);
  return generate({spec, g.seed});
}

Result repro_step_ratio(const ReproOptions& o, const Globals& g) {
  const DiscreteMeasure nu = step_data(o, g);
  SolverConfig cfg = repro_config(o, g);
  cfg.exact_coupling_step = !o.entropic;
  Result r;
  r.data = nu;
  json runs = json::object();
  for (double b : o.bounds.empty() ? std::vector<double>{4.0, 6.0} : o.bounds) {
    const SolveReport rep = solve_cone_alternating(nu, LengthSdRatio{o.m.value_or(100), b}, cfg);
    const std::string key = "bound_" + label(b);
    add_run(r, runs, key, rep, cfg);
    add_cone_checks(r, key, rep, nu);
    r.checks.add(key + ".ratio", rep.diagnostics.at("ratio") <= b + 1e-4);
    runs[key]["identity_defect"] = number(identity_defect(rep, nu));
  }
  r.doc["runs"] = runs;
  r.doc["data_variance"] = number(variance(nu));
  return r;
}

// Angle between the line carrying the atoms of mu and the top principal
// direction of nu.
double angle_to_pc1(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  const DiscreteMeasure c = center(nu);
  const Matrix cov = c.points().transpose() * c.weights().asDiagonal() * c.points();
  Eigen::SelfAdjointEigenSolver<Matrix> es(cov);
  const Vector pc1 = es.eigenvectors().col(es.eigenvectors().cols() - 1);
  const Matrix x = mu.points().rowwise() - mu.points().colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(x, Eigen::ComputeThinV);
  const Vector dir = svd.matrixV().col(0);
  const double cosv = std::abs(dir.dot(pc1));
  return std::atan2((dir - dir.dot(pc1) * pc1).norm(), cosv);
}

Result repro_step_curvature(const ReproOptions& o, const Globals& g) {
  const DiscreteMeasure nu = step_data(o, g);
  SolverConfig cfg = repro_config(o, g);
  cfg.exact_coupling_step = !o.entropic;
  const std::size_t m = o.m.value_or(100);
  Result r;
  r.data = nu;
  json runs = json::object();
  for (double lambda : o.penalties.empty() ? std::vector<double>{1e-6, 1e-5} : o.penalties) {
    const SolveReport rep = solve_cone_alternating(nu, BoundedCurvature{m, lambda}, cfg);
    const std::string key = "penalty_" + label(lambda);
    add_run(r, runs, key, rep, cfg);
    add_cone_checks(r, key, rep, nu);
    runs[key]["identity_defect"] = number(identity_defect(rep, nu));
  }
  // Zero curvature: with one atom per data point the optimal line is the
  // first principal axis.
  const SolveReport line = solve_cone_alternating(nu, BoundedCurvature{nu.size(), kInfinity}, cfg);
  const double angle = angle_to_pc1(line.mu_star, nu);
  add_run(r, runs, "collinear", line, cfg);
  runs["collinear"]["angle_to_pc1"] = number(angle);
  r.checks.add("collinear.converged", line.converged);
  r.checks.add("collinear.pc1_angle", angle <= 1e-3);
  r.doc["runs"] = runs;
  r.doc["data_variance"] = number(variance(nu));
  return r;
}

Result repro_pca_factor(const ReproOptions& o, const Globals& g) {
  FactorModel spec;
  spec.loadings = default_factor_loadings();
  spec.n = o.n.value_or(spec.n);
  spec.sigma = o.sigma.value_or(spec.sigma);
  const DiscreteMeasure nu = generate({spec, g.seed});
  const std::size_t k = o.m.value_or(static_cast<std::size_t>(spec.loadings.cols()));
  const SubspaceResult s = solve_subspace(nu, k);
  Result r;
  const Matrix& l = s.loadings;
  const Matrix target = spec.loadings * spec.loadings.transpose();
  const Matrix est = l * l.transpose() - s.noise_variance * s.basis * s.basis.transpose();
  const double err = (est - target).norm();
  const double sigma2 = spec.sigma * spec.sigma;
  auto rows = [](const Matrix& a) {
    json j = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back(number(a(i, c)));
      j.push_back(row);
    }
    return j;
  };
  json eig = json::array();
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i) eig.push_back(number(s.eigenvalues(i)));
  r.doc["n"] = nu.size();
  r.doc["eigenvalues"] = eig;
  r.doc["basis"] = rows(s.basis);
  r.doc["loadings"] = rows(l);
  r.doc["true_loadings"] = rows(spec.loadings);
  r.doc["noise_variance"] = number(s.noise_variance);
  r.doc["loading_error_frobenius"] = number(err);
  r.doc["variance"] = number(s.report.variance);
  r.doc["kdr_slack"] = number(s.report.kdr_slack);
  r.checks.add("loading_error", err <= 0.1);
  r.checks.add("noise_variance", std::abs(s.noise_variance - sigma2) <= 0.05);
  r.checks.add("kdr_feasible", s.report.kdr_slack >= -1e-9 * second_moment(nu));
  r.measures.emplace_back("mu_star", s.report.mu_star);
  return r;
}

Result run_repro(const ReproOptions& o, const Globals& g) {
  const std::string& e = o.experiment;
  Result r;
  if (e == "counterexample-1d") r = repro_counterexample_1d();
  else if (e == "counterexample-2d") r = repro_counterexample_2d();
  else if (e == "instability") r = repro_instability(g);
  else if (e == "supplement-a") r = repro_supplement_a();
  else if (e == "parabola") r = repro_parabola(o, g);
  else if (e == "step-ratio") r = repro_step_ratio(o, g);
  else if (e == "step-curvature") r = repro_step_curvature(o, g);
  else if (e == "pca-factor") r = repro_pca_factor(o, g);
  else throw Error(ErrorCode::kInvalidConfig, "unknown experiment " + e);
  r.doc["command"] = "repro";
  r.doc["experiment"] = e;
  return r;
}

void error_line(std::ostream& err, const std::string& code, const std::string& message) {
  err << json{{"error", code}, {"message", message}}.dump() << "\n";
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance-maximizing denoising of discrete measures", "kdenoise"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Seed for data generation and solver restarts");
  app.add_option("--out", g.out_dir, "Directory for the JSON report and CSV files");
  app.add_option("--format", g.format, "json, or csv to also write measures and couplings")
      ->check(CLI::IsMember({"json", "csv"}));

  auto add_pair = [&](CLI::App* sub, PairOptions& o) {
    sub->fallthrough();
    sub->add_option("--mu", o.mu, "Measure CSV")->required();
    sub->add_option("--nu", o.nu, "Measure CSV")->required();
  };
  PairOptions w2o, ordo, kdro;
  auto* w2 = app.add_subcommand("w2", "Squared Wasserstein distance");
  add_pair(w2, w2o);
  w2->add_option("--epsilon", w2o.epsilon, "Entropic, relative to the mean cost (0: exact)");
  auto* order = app.add_subcommand("check-order", "Convex order test with martingale witness");
  add_pair(order, ordo);
  auto* kdr = app.add_subcommand("check-kdr", "Kantorovich dominance test");
  add_pair(kdr, kdro);
  for (auto [sub, o] : {std::pair{order, &ordo}, std::pair{kdr, &kdro}}) {
    sub->add_option("--expect", o->expect, "Assert a verdict")
        ->check(CLI::IsMember({"dominated", "not-dominated"}));
  }

  DenoiseOptions dn;
  auto* denoise = app.add_subcommand("denoise", "Maximize variance over a domain");
  denoise->fallthrough();
  denoise->add_option("--nu", dn.nu, "Data measure CSV")->required();
  denoise->add_option("--domain", dn.domain, "Domain")
      ->required()
      ->check(CLI::IsMember(
          {"bounded-length", "ratio", "curvature", "subspace", "discrete", "monotone"}));
  denoise->add_option("--m", dn.m, "Atoms (subspace: dimension)");
  denoise->add_option("--bound", dn.bound, "Length bound or length/sd ratio bound");
  denoise->add_option("--penalty", dn.penalty, "Curvature or monotonicity penalty weight");
  denoise->add_option("--epsilon", dn.epsilon, "Sinkhorn regularization, relative to mean cost");
  denoise->add_option("--max-iter", dn.max_iter, "Outer iteration cap");
  denoise->add_option("--order", dn.order, "Dominance constraint")
      ->check(CLI::IsMember({"kdr", "convex"}));
  denoise->add_flag("--exact", dn.exact, "Exact coupling step instead of Sinkhorn");
  denoise->add_option("--restarts", dn.restarts, "Random starts for the clustering solvers");

  ReproOptions ro;
  auto* repro = app.add_subcommand("repro", "Reproduce an experiment and check its claims");
  repro->fallthrough();
  repro->add_option("experiment", ro.experiment, "Experiment")
      ->required()
      ->check(CLI::IsMember({"counterexample-1d", "counterexample-2d", "instability",
                             "supplement-a", "parabola", "step-ratio", "step-curvature",
                             "pca-factor"}));
  repro->add_option("--n", ro.n, "Sample size");
  repro->add_option("--m", ro.m, "Atoms (pca-factor: subspace dimension)");
  repro->add_option("--bound", ro.bounds, "Bounds to sweep (repeatable)");
  repro->add_option("--penalty", ro.penalties, "Curvature penalties to sweep (repeatable)");
  repro->add_option("--sigma", ro.sigma, "Noise standard deviation");
  repro->add_option("--max-iter", ro.max_iter, "Outer iteration cap");
  repro->add_flag("--entropic", ro.entropic, "Sinkhorn coupling steps in the cone solvers");
  repro->add_flag("--convex-order", ro.convex_order,
                  "parabola: also solve under the convex order (slow)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (g.format == "csv" && g.out_dir.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--format csv needs --out");
    }
    Result r;
    std::string stem;
    if (w2->parsed()) {
      r = cmd_w2(w2o);
      stem = "w2";
    } else if (order->parsed()) {
      r = cmd_check_order(ordo);
      stem = "check_order";
    } else if (kdr->parsed()) {
      r = cmd_check_kdr(kdro);
      stem = "check_kdr";
    } else if (denoise->parsed()) {
      r = cmd_denoise(dn, g);
      stem = "denoise";
    } else {
      r = run_repro(ro, g);
      stem = ro.experiment;
    }
    emit(r, stem, g, out);
    if (!r.checks.passed()) {
      std::string names;
      for (const auto& f : r.checks.failed) names += (names.empty() ? "" : ",") + f;
      error_line(err, "check_failed", names);
      return 1;
    }
    return 0;
  } catch (const Error& e) {
    error_line(err, to_string(e.code()), e.what());
  } catch (const std::exception& e) {
    error_line(err, "internal", e.what());
  }
  return 2;
}

}  // namespace kdenoise::cli
