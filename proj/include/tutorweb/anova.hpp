#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tutorweb {

// Categorical predictors plus a real response, one row per observation.
class DataFrame {
 public:
  void add_factor(std::string name, std::vector<std::string> values);
  void set_response(std::vector<double> response);

  std::size_t rows() const { return response_.size(); }
  bool has_factor(const std::string& name) const { return factors_.count(name) != 0; }
  const std::vector<std::string>& factor(const std::string& name) const;
  // Sorted distinct levels; the first is the reference level.
  std::vector<std::string> levels(const std::string& name) const;
  const std::vector<double>& response() const { return response_; }

  // Same frame with rows reordered: row i of the result is row order[i].
  DataFrame permuted(std::span<const std::size_t> order) const;

 private:
  std::map<std::string, std::vector<std::string>> factors_;
  std::vector<double> response_;
};

// A main effect (one factor) or an interaction (several).
struct Term {
  std::vector<std::string> factors;

  std::string label() const;  // factors joined by ':'
  // True when every factor of `other` is a factor of this term.
  bool contains(const Term& other) const;

  bool operator==(const Term&) const = default;
};

struct ModelSpec {
  std::vector<Term> terms;

  // Interactions must come after all their marginal terms.
  void validate() const;
  ModelSpec without(const std::string& label) const;
  std::optional<std::size_t> index_of(const std::string& label) const;

  // treatment, math, treatment:math, exam, student
  static ModelSpec crossover();
};

inline constexpr std::size_t kInterceptTerm = static_cast<std::size_t>(-1);

struct DesignColumn {
  std::size_t term = kInterceptTerm;  // index into spec.terms
  std::string name;
};

// Dummy-coded design, reference = first level, intercept first. Column-major.
struct Design {
  std::size_t rows = 0;
  std::vector<DesignColumn> columns;
  std::vector<double> values;
  std::vector<std::string> single_level_factors;
  ModelSpec spec;

  std::size_t cols() const { return columns.size(); }
  std::span<const double> column(std::size_t j) const { return {values.data() + j * rows, rows}; }
  std::size_t term_column_count(std::size_t term) const;
};

Design encode_design(const DataFrame& frame, const ModelSpec& spec);

struct FitResult {
  std::vector<double> coefficients;  // NaN where aliased
  std::vector<double> std_errors;    // NaN where aliased or residual df is 0
  std::vector<bool> aliased;
  std::vector<double> effects;  // orthogonal effect of each retained column, 0 when aliased
  std::vector<double> residuals;
  double rss = 0.0;
  std::size_t rank = 0;
  std::size_t residual_df = 0;
  double residual_variance = 0.0;  // NaN when residual df is 0
};

// Householder least squares, columns taken in order; a column whose remaining
// norm is below 1e-10 x the largest diagonal so far is flagged aliased.
FitResult fit_ls(const Design& design, std::span<const double> response);

struct AnovaRow {
  std::string term;
  std::size_t df = 0;                  // after aliasing
  std::size_t df_before_aliasing = 0;  // dummy-coded column count
  double ss = 0.0;
  std::optional<double> f;
  std::optional<double> p;
  bool p_underflow = false;  // p < 1e-300, reported as 0
};

struct AnovaTable {
  std::vector<AnovaRow> rows;
  std::size_t residual_df = 0;
  double residual_ss = 0.0;
  double total_ss = 0.0;  // corrected for the mean
  bool zero_residual_variance = false;
  std::vector<std::string> single_level_factors;

  const AnovaRow* find(const std::string& label) const;
};

// Type-I sums of squares in spec order, each F tested against the full-model residual.
AnovaTable sequential_anova(const DataFrame& frame, const ModelSpec& spec);
AnovaTable sequential_anova(const Design& design, const FitResult& fit, std::span<const double> response);

struct EliminationStep {
  std::string term;
  double p = 0.0;
};

struct EliminationResult {
  std::vector<EliminationStep> trace;
  AnovaTable initial;
  AnovaTable reduced;
  ModelSpec final_spec;
};

// Drops the least significant removable term with p > alpha and refits, until
// none qualifies. A term is removable only when no retained term contains it.
EliminationResult backward_eliminate(const DataFrame& frame, const ModelSpec& spec, double alpha = 0.05);

struct ConfidenceInterval {
  double estimate = 0.0;
  double std_error = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t df = 0;
  double level = 0.95;
};

// Interval for the second-level-minus-reference contrast of a two-level factor
// fitted as a main effect in `spec`.
ConfidenceInterval treatment_confint(const DataFrame& frame, const ModelSpec& spec, double level = 0.95,
                                     const std::string& factor = "treatment");

}  // namespace tutorweb
