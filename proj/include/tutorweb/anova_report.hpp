#pragma once

#include <optional>
#include <string>

#include "json.hpp"
#include "tutorweb/anova.hpp"

namespace tutorweb {

nlohmann::json to_json(const AnovaTable& table);
nlohmann::json to_json(const EliminationResult& result);
nlohmann::json to_json(const ConfidenceInterval& ci);

// Fixed-column text table: one row per term, then the residual row.
std::string format_anova_table(const AnovaTable& table);
std::string format_elimination(const EliminationResult& result);

// Printed precisions; the JSON record carries full doubles.
std::string format_ss(double ss);
std::string format_f(const std::optional<double>& f);
std::string format_p(const AnovaRow& row);

}  // namespace tutorweb
