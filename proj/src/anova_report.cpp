#include "tutorweb/anova_report.hpp"

#include <cstdio>
#include <sstream>

namespace tutorweb {

namespace {

std::string printf_string(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

std::string pad(const std::string& text, std::size_t width, bool left = false) {
  if (text.size() >= width) return text;
  const std::string fill(width - text.size(), ' ');
  return left ? text + fill : fill + text;
}

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json to_json(const AnovaTable& table) {
  auto rows = nlohmann::json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"term", r.term},
                    {"df", r.df},
                    {"df_before_aliasing", r.df_before_aliasing},
                    {"ss", r.ss},
                    {"f", optional_number(r.f)},
                    {"p", optional_number(r.p)},
                    {"p_underflow", r.p_underflow}});
  }
  return {{"rows", rows},
          {"residual_df", table.residual_df},
          {"residual_ss", table.residual_ss},
          {"total_ss", table.total_ss},
          {"zero_residual_variance", table.zero_residual_variance},
          {"single_level_factors", table.single_level_factors}};
}

nlohmann::json to_json(const EliminationResult& result) {
  auto trace = nlohmann::json::array();
  for (const auto& step : result.trace) trace.push_back({{"term", step.term}, {"p", step.p}});
  auto terms = nlohmann::json::array();
  for (const auto& t : result.final_spec.terms) terms.push_back(t.label());
  return {{"trace", trace}, {"final_terms", terms}, {"reduced", to_json(result.reduced)}};
}

nlohmann::json to_json(const ConfidenceInterval& ci) {
  return {{"estimate", ci.estimate}, {"std_error", ci.std_error}, {"lo", ci.lo},
          {"hi", ci.hi},             {"df", ci.df},               {"level", ci.level}};
}

std::string format_ss(double ss) { return printf_string("%.4f", ss); }

std::string format_f(const std::optional<double>& f) { return f ? printf_string("%.4f", *f) : "NA"; }

std::string format_p(const AnovaRow& row) {
  if (row.p_underflow) return "<1e-300";
  return row.p ? printf_string("%.4g", *row.p) : "NA";
}

std::string format_anova_table(const AnovaTable& table) {
  std::ostringstream out;
  out << pad("Term", 20, true) << pad("Df", 6) << pad("Sum Sq", 16) << pad("F", 14) << pad("p-value", 14) << "\n";
  for (const auto& r : table.rows) {
    out << pad(r.term, 20, true) << pad(std::to_string(r.df), 6) << pad(format_ss(r.ss), 16)
        << pad(format_f(r.f), 14) << pad(format_p(r), 14) << "\n";
  }
  out << pad("Residuals", 20, true) << pad(std::to_string(table.residual_df), 6)
      << pad(format_ss(table.residual_ss), 16) << "\n";
  if (table.zero_residual_variance) out << "note: zero residual variance; F and p undefined\n";
  for (const auto& r : table.rows) {
    if (r.df < r.df_before_aliasing) {
      out << "note: " << r.term << " has " << r.df_before_aliasing - r.df << " aliased column(s)\n";
    }
  }
  for (const auto& f : table.single_level_factors) out << "note: factor " << f << " has a single level\n";
  return out.str();
}

std::string format_elimination(const EliminationResult& result) {
  std::ostringstream out;
  if (result.trace.empty()) {
    out << "no terms removed\n";
  }
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    out << "step " << i + 1 << ": removed " << result.trace[i].term << " (p = "
        << printf_string("%.4g", result.trace[i].p) << ")\n";
  }
  out << "final model:";
  for (const auto& t : result.final_spec.terms) out << " " << t.label();
  out << "\n";
  return out.str();
}

}  // namespace tutorweb
