#include "tutorweb/anova.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "tutorweb/distributions.hpp"
#include "tutorweb/error.hpp"

namespace tutorweb {

namespace {

constexpr double kAliasTolerance = 1e-10;
constexpr double kUnderflowP = 1e-300;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

void DataFrame::add_factor(std::string name, std::vector<std::string> values) {
  if (!response_.empty() && values.size() != response_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "factor '" + name + "' length differs from response");
  }
  factors_[std::move(name)] = std::move(values);
}

void DataFrame::set_response(std::vector<double> response) {
  for (const auto& [name, values] : factors_) {
    if (values.size() != response.size()) {
      throw Error(ErrorCode::DimensionMismatch, "response length differs from factor '" + name + "'");
    }
  }
  response_ = std::move(response);
}

const std::vector<std::string>& DataFrame::factor(const std::string& name) const {
  auto it = factors_.find(name);
  if (it == factors_.end()) throw Error(ErrorCode::InvalidModel, "unknown factor '" + name + "'");
  return it->second;
}

std::vector<std::string> DataFrame::levels(const std::string& name) const {
  const auto& values = factor(name);
  std::set<std::string> distinct(values.begin(), values.end());
  return {distinct.begin(), distinct.end()};
}

DataFrame DataFrame::permuted(std::span<const std::size_t> order) const {
  DataFrame out;
  for (const auto& [name, values] : factors_) {
    std::vector<std::string> v;
    v.reserve(order.size());
    for (auto i : order) v.push_back(values.at(i));
    out.factors_[name] = std::move(v);
  }
  for (auto i : order) out.response_.push_back(response_.at(i));
  return out;
}

std::string Term::label() const {
  std::string out;
  for (const auto& f : factors) {
    if (!out.empty()) out += ':';
    out += f;
  }
  return out;
}

bool Term::contains(const Term& other) const {
  return std::all_of(other.factors.begin(), other.factors.end(), [&](const std::string& f) {
    return std::find(factors.begin(), factors.end(), f) != factors.end();
  });
}

void ModelSpec::validate() const {
  std::set<std::string> labels;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& term = terms[i];
    if (term.factors.empty()) throw Error(ErrorCode::InvalidModel, "empty term");
    if (!labels.insert(term.label()).second) throw Error(ErrorCode::InvalidModel, "duplicate term " + term.label());
    if (term.factors.size() < 2) continue;
    // Every proper marginal (here: each single factor and each sub-interaction
    // listed in the model) must precede the interaction.
    for (const auto& f : term.factors) {
      auto it = std::find(terms.begin(), terms.begin() + static_cast<std::ptrdiff_t>(i), Term{{f}});
      if (it == terms.begin() + static_cast<std::ptrdiff_t>(i)) {
        throw Error(ErrorCode::InvalidModel, term.label() + " listed before its main effect " + f);
      }
    }
    for (std::size_t j = i + 1; j < terms.size(); ++j) {
      if (term.contains(terms[j]) && terms[j].factors.size() < term.factors.size()) {
        throw Error(ErrorCode::InvalidModel, term.label() + " listed before its marginal " + terms[j].label());
      }
    }
  }
}

ModelSpec ModelSpec::without(const std::string& label) const {
  ModelSpec out;
  for (const auto& t : terms) {
    if (t.label() != label) out.terms.push_back(t);
  }
  return out;
}

std::optional<std::size_t> ModelSpec::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].label() == label) return i;
  }
  return std::nullopt;
}

ModelSpec ModelSpec::crossover() {
  return {{Term{{"treatment"}}, Term{{"math"}}, Term{{"treatment", "math"}}, Term{{"exam"}},
           Term{{"student"}}}};
}

std::size_t Design::term_column_count(std::size_t term) const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(), [&](const DesignColumn& c) { return c.term == term; }));
}

Design encode_design(const DataFrame& frame, const ModelSpec& spec) {
  spec.validate();
  if (frame.rows() < 2) throw Error(ErrorCode::EmptyData, "need at least 2 records");
  const std::size_t n = frame.rows();

  Design design;
  design.rows = n;
  design.spec = spec;
  design.columns.push_back({kInterceptTerm, "(intercept)"});
  design.values.assign(n, 1.0);

  // Per factor: the level index of each row (0 = reference).
  std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::size_t>>> coded;
  for (const auto& term : spec.terms) {
    for (const auto& f : term.factors) {
      if (coded.count(f)) continue;
      auto levels = frame.levels(f);
      const auto& values = frame.factor(f);
      std::vector<std::size_t> index(n);
      for (std::size_t i = 0; i < n; ++i) {
        index[i] = static_cast<std::size_t>(std::lower_bound(levels.begin(), levels.end(), values[i]) -
                                            levels.begin());
      }
      if (levels.size() < 2) design.single_level_factors.push_back(f);
      coded.emplace(f, std::make_pair(std::move(levels), std::move(index)));
    }
  }

  for (std::size_t t = 0; t < spec.terms.size(); ++t) {
    // Cartesian product of the non-reference levels of each factor in the term.
    std::vector<std::vector<std::size_t>> combos{{}};
    for (const auto& f : spec.terms[t].factors) {
      const std::size_t n_levels = coded.at(f).first.size();
      std::vector<std::vector<std::size_t>> next;
      for (const auto& combo : combos) {
        for (std::size_t level = 1; level < n_levels; ++level) {
          auto c = combo;
          c.push_back(level);
          next.push_back(std::move(c));
        }
      }
      combos = std::move(next);
    }
    for (const auto& combo : combos) {
      std::string name;
      for (std::size_t k = 0; k < combo.size(); ++k) {
        const auto& f = spec.terms[t].factors[k];
        if (!name.empty()) name += ':';
        name += f + "[" + coded.at(f).first[combo[k]] + "]";
      }
      design.columns.push_back({t, name});
      for (std::size_t i = 0; i < n; ++i) {
        bool on = true;
        for (std::size_t k = 0; k < combo.size() && on; ++k) {
          on = coded.at(spec.terms[t].factors[k]).second[i] == combo[k];
        }
        design.values.push_back(on ? 1.0 : 0.0);
      }
    }
  }
  return design;
}

FitResult fit_ls(const Design& design, std::span<const double> response) {
  const std::size_t n = design.rows;
  const std::size_t p = design.cols();
  if (response.size() != n) throw Error(ErrorCode::DimensionMismatch, "response length != design rows");
  if (n < 1) throw Error(ErrorCode::EmptyData, "no rows");

  std::vector<double> a = design.values;  // reduced in place, column-major
  std::vector<double> qty(response.begin(), response.end());
  std::vector<std::size_t> retained;  // column index of each pivot, in order
  FitResult fit;
  fit.aliased.assign(p, false);
  fit.effects.assign(p, 0.0);

  std::vector<double> v(n);
  double largest_diagonal = 0.0;
  std::size_t rank = 0;
  for (std::size_t j = 0; j < p; ++j) {
    double* col = a.data() + j * n;
    double norm2 = 0.0;
    for (std::size_t i = rank; i < n; ++i) norm2 += col[i] * col[i];
    const double norm = std::sqrt(norm2);
    const double original = std::sqrt(dot(design.column(j), design.column(j)));
    if (rank == n || norm <= kAliasTolerance * std::max(largest_diagonal, original)) {
      fit.aliased[j] = true;
      continue;
    }
    // Householder vector for col[rank:n], mapping it onto -sign(x0) * norm * e0.
    const double alpha = col[rank] > 0 ? -norm : norm;
    double vnorm2 = 0.0;
    for (std::size_t i = rank; i < n; ++i) {
      v[i] = col[i];
      if (i == rank) v[i] -= alpha;
      vnorm2 += v[i] * v[i];
    }
    auto reflect = [&](double* x) {
      double s = 0.0;
      for (std::size_t i = rank; i < n; ++i) s += v[i] * x[i];
      s = 2.0 * s / vnorm2;
      for (std::size_t i = rank; i < n; ++i) x[i] -= s * v[i];
    };
    col[rank] = alpha;
    for (std::size_t i = rank + 1; i < n; ++i) col[i] = 0.0;
    for (std::size_t k = j + 1; k < p; ++k) reflect(a.data() + k * n);
    reflect(qty.data());

    fit.effects[j] = qty[rank];
    largest_diagonal = std::max(largest_diagonal, std::fabs(alpha));
    retained.push_back(j);
    ++rank;
  }

  fit.rank = rank;
  fit.residual_df = n - rank;
  fit.rss = 0.0;
  for (std::size_t i = rank; i < n; ++i) fit.rss += qty[i] * qty[i];
  fit.residual_variance = fit.residual_df > 0 ? fit.rss / static_cast<double>(fit.residual_df) : kNaN;

  // Back substitution on the retained triangle R[k][l] = a(k, retained[l]).
  auto r_at = [&](std::size_t k, std::size_t l) { return a[retained[l] * n + k]; };
  std::vector<double> beta(rank, 0.0);
  for (std::size_t k = rank; k-- > 0;) {
    double s = qty[k];
    for (std::size_t l = k + 1; l < rank; ++l) s -= r_at(k, l) * beta[l];
    beta[k] = s / r_at(k, k);
  }
  // diag((R^T R)^-1) from the rows of R^-1.
  std::vector<double> inv(rank * rank, 0.0);  // row-major upper triangle of R^-1
  for (std::size_t c = 0; c < rank; ++c) {
    for (std::size_t k = c + 1; k-- > 0;) {
      double s = k == c ? 1.0 : 0.0;
      for (std::size_t l = k + 1; l <= c; ++l) s -= r_at(k, l) * inv[l * rank + c];
      inv[k * rank + c] = s / r_at(k, k);
    }
  }

  fit.coefficients.assign(p, kNaN);
  fit.std_errors.assign(p, kNaN);
  for (std::size_t k = 0; k < rank; ++k) {
    fit.coefficients[retained[k]] = beta[k];
    if (fit.residual_df > 0) {
      double s = 0.0;
      for (std::size_t c = k; c < rank; ++c) s += inv[k * rank + c] * inv[k * rank + c];
      fit.std_errors[retained[k]] = std::sqrt(fit.residual_variance * s);
    }
  }

  fit.residuals.assign(response.begin(), response.end());
  for (std::size_t k = 0; k < rank; ++k) {
    const auto column = design.column(retained[k]);
    for (std::size_t i = 0; i < n; ++i) fit.residuals[i] -= column[i] * beta[k];
  }
  return fit;
}

const AnovaRow* AnovaTable::find(const std::string& label) const {
  for (const auto& row : rows) {
    if (row.term == label) return &row;
  }
  return nullptr;
}

AnovaTable sequential_anova(const Design& design, const FitResult& fit, std::span<const double> response) {
  AnovaTable table;
  table.single_level_factors = design.single_level_factors;
  table.residual_df = fit.residual_df;
  table.residual_ss = fit.rss;

  const double n = static_cast<double>(response.size());
  const double mean = std::accumulate(response.begin(), response.end(), 0.0) / n;
  double raw_ss = 0.0;
  for (double y : response) {
    table.total_ss += (y - mean) * (y - mean);
    raw_ss += y * y;
  }
  table.zero_residual_variance = fit.residual_df == 0 || fit.rss <= 1e-20 * raw_ss;

  for (std::size_t t = 0; t < design.spec.terms.size(); ++t) {
    AnovaRow row;
    row.term = design.spec.terms[t].label();
    for (std::size_t j = 0; j < design.cols(); ++j) {
      if (design.columns[j].term != t) continue;
      ++row.df_before_aliasing;
      if (fit.aliased[j]) continue;
      ++row.df;
      row.ss += fit.effects[j] * fit.effects[j];
    }
    if (row.df > 0 && !table.zero_residual_variance) {
      const double ms = row.ss / static_cast<double>(row.df);
      const double f = ms / fit.residual_variance;
      row.f = f;
      double p = f_pvalue(f, static_cast<double>(row.df), static_cast<double>(fit.residual_df));
      if (p < kUnderflowP) {
        p = 0.0;
        row.p_underflow = true;
      }
      row.p = std::clamp(p, 0.0, 1.0);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

AnovaTable sequential_anova(const DataFrame& frame, const ModelSpec& spec) {
  const auto design = encode_design(frame, spec);
  const auto fit = fit_ls(design, frame.response());
  return sequential_anova(design, fit, frame.response());
}

EliminationResult backward_eliminate(const DataFrame& frame, const ModelSpec& spec, double alpha) {
  EliminationResult result;
  ModelSpec current = spec;
  AnovaTable table = sequential_anova(frame, current);
  result.initial = table;
  for (;;) {
    std::optional<std::size_t> worst;
    double worst_p = alpha;
    for (std::size_t t = 0; t < current.terms.size(); ++t) {
      const auto& row = table.rows[t];
      if (!row.p || *row.p <= alpha) continue;
      const bool has_parent_interaction = std::any_of(
          current.terms.begin(), current.terms.end(), [&](const Term& other) {
            return other.factors.size() > current.terms[t].factors.size() && other.contains(current.terms[t]);
          });
      if (has_parent_interaction) continue;
      if (*row.p >= worst_p) {
        worst_p = *row.p;
        worst = t;
      }
    }
    if (!worst) break;
    result.trace.push_back({current.terms[*worst].label(), worst_p});
    current = current.without(current.terms[*worst].label());
    if (current.terms.empty()) {
      table = AnovaTable{};
      table.total_ss = result.initial.total_ss;
      table.residual_ss = result.initial.total_ss;
      table.residual_df = frame.rows() - 1;
      break;
    }
    table = sequential_anova(frame, current);
  }
  result.reduced = std::move(table);
  result.final_spec = std::move(current);
  return result;
}

ConfidenceInterval treatment_confint(const DataFrame& frame, const ModelSpec& spec, double level,
                                     const std::string& factor) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::InvalidModel, "confidence level must lie in (0, 1)");
  const auto term = spec.index_of(factor);
  if (!term) throw Error(ErrorCode::NotEstimable, factor + " is not a term of the model");
  const auto design = encode_design(frame, spec);
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < design.cols(); ++j) {
    if (design.columns[j].term == *term) cols.push_back(j);
  }
  if (cols.size() != 1) {
    throw Error(ErrorCode::NotEstimable, factor + " must have exactly two levels, has " +
                                             std::to_string(cols.size() + 1));
  }
  const auto fit = fit_ls(design, frame.response());
  const std::size_t j = cols.front();
  if (fit.aliased[j]) throw Error(ErrorCode::NotEstimable, factor + " contrast is aliased");
  if (fit.residual_df == 0) throw Error(ErrorCode::NotEstimable, "no residual degrees of freedom");

  ConfidenceInterval ci;
  ci.estimate = fit.coefficients[j];
  ci.std_error = fit.std_errors[j];
  ci.df = fit.residual_df;
  ci.level = level;
  const double t = t_quantile(0.5 + level / 2.0, static_cast<double>(fit.residual_df));
  ci.lo = ci.estimate - t * ci.std_error;
  ci.hi = ci.estimate + t * ci.std_error;
  return ci;
}

}  // namespace tutorweb
