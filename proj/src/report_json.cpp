#include "kdenoise/report_json.hpp"

#include "kdenoise/error.hpp"

#include <cmath>

namespace kdenoise {

using nlohmann::json;

json number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json measure_to_json(const DiscreteMeasure& mu) {
  json pts = json::array();
  for (Eigen::Index i = 0; i < mu.points().rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < mu.points().cols(); ++k) row.push_back(mu.points()(i, k));
    pts.push_back(std::move(row));
  }
  json w = json::array();
  for (Eigen::Index i = 0; i < mu.weights().size(); ++i) w.push_back(mu.weights()(i));
  return {{"dim", mu.dim()}, {"points", std::move(pts)}, {"weights", std::move(w)}};
}

DiscreteMeasure measure_from_json(const json& j) {
  try {
    const auto& pts = j.at("points");
    const auto& w = j.at("weights");
    const auto d = j.at("dim").get<Eigen::Index>();
    const auto m = static_cast<Eigen::Index>(pts.size());
    if (static_cast<Eigen::Index>(w.size()) != m) {
      throw Error(ErrorCode::kInvalidMeasure, "points and weights differ in length");
    }
    Matrix p(m, d);
    Vector v(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& row = pts.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != d) {
        throw Error(ErrorCode::kDimensionMismatch, "atom has the wrong dimension");
      }
      for (Eigen::Index k = 0; k < d; ++k) p(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
      v(i) = w.at(static_cast<std::size_t>(i)).get<double>();
    }
    return DiscreteMeasure(p, v);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIo, std::string("malformed measure JSON: ") + e.what());
  }
}

json config_to_json(const SolverConfig& cfg) {
  json j = {
      {"max_outer_iter", cfg.max_outer_iter},
      {"step_size_x", number(cfg.step_size_x)},
      {"step_size_u", number(cfg.step_size_u)},
      {"multiplier_step_sizes",
       {{"lambda1", cfg.multiplier_step_sizes.lambda1},
        {"lambda1_i", cfg.multiplier_step_sizes.lambda1_i},
        {"lambda2", cfg.multiplier_step_sizes.lambda2},
        {"lambda3", cfg.multiplier_step_sizes.lambda3}}},
      {"sinkhorn",
       {{"epsilon", number(cfg.sinkhorn.epsilon)},
        {"max_iter", cfg.sinkhorn.max_iter},
        {"marginal_tol", number(cfg.sinkhorn.marginal_tol)},
        {"use_epsilon_scaling", cfg.sinkhorn.use_epsilon_scaling}}},
      {"exact_coupling_step", cfg.exact_coupling_step},
      {"mixing", number(cfg.mixing)},
      {"convergence_tol", number(cfg.convergence_tol)},
      {"seed", cfg.seed},
      {"restarts", cfg.restarts},
      {"initial_atoms", cfg.initial_atoms.has_value()},
  };
  return j;
}

json report_to_json(const SolveReport& r, const SolverConfig& cfg) {
  json residuals = json::object();
  for (const auto& [k, v] : r.domain_residuals) residuals[k] = number(v);
  json diagnostics = json::object();
  for (const auto& [k, v] : r.diagnostics) diagnostics[k] = number(v);
  json history = json::array();
  for (double v : r.objective_history) history.push_back(number(v));
  return {
      {"schema", kReportSchema},
      {"domain", r.domain},
      {"mu_star", measure_to_json(r.mu_star)},
      {"variance", number(r.variance)},
      {"w2_squared", number(r.w2_squared)},
      {"kdr_slack", number(r.kdr_slack)},
      {"domain_residuals", std::move(residuals)},
      {"diagnostics", std::move(diagnostics)},
      {"objective_history", std::move(history)},
      {"iterations", r.iterations},
      {"converged", r.converged},
      {"convex_order", r.convex_order ? json(*r.convex_order) : json(nullptr)},
      {"seed", r.seed},
      {"transport", r.transport},
      {"config", config_to_json(cfg)},
  };
}

json verdict_to_json(const ConvexOrderVerdict& v) {
  return {{"dominated", v.dominated}, {"residual", number(v.max_residual)}};
}

json verdict_to_json(const KdrVerdict& v) {
  return {{"dominated", v.dominated},
          {"slack", number(v.slack)},
          {"correlation_gap", number(v.correlation_gap)},
          {"residual", number(v.route_disagreement)}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace kdenoise
