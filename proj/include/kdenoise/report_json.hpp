#pragma once

#include "kdenoise/dominance.hpp"
#include "kdenoise/measure.hpp"
#include "kdenoise/solvers.hpp"

#include <json.hpp>

#include <string>

namespace kdenoise {

inline constexpr int kReportSchema = 1;

/// Finite values as numbers; inf, -inf and nan as the strings "inf", "-inf"
/// and "nan" (plain JSON has no encoding for them).
nlohmann::json number(double v);

/// {"dim", "points": [[...], ...], "weights": [...]}.
nlohmann::json measure_to_json(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_json(const nlohmann::json& j);

nlohmann::json config_to_json(const SolverConfig& cfg);

/// Everything in the report except the coupling, which belongs in a CSV.
nlohmann::json report_to_json(const SolveReport& r, const SolverConfig& cfg);

nlohmann::json verdict_to_json(const ConvexOrderVerdict& v);
nlohmann::json verdict_to_json(const KdrVerdict& v);

/// Pretty-printed with a trailing newline. Keys are sorted, so equal inputs
/// give identical bytes.
std::string dump(const nlohmann::json& j);

}  // namespace kdenoise
