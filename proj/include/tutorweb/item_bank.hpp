#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tutorweb/content.hpp"
#include "tutorweb/rational.hpp"

namespace tutorweb {

using QuestionId = std::string;

struct Answer {
  std::string text;
  bool correct = false;

  bool operator==(const Answer&) const = default;
};

struct Question {
  QuestionId id;
  NodeId lecture_id;
  std::string stem;
  std::string format = "plain";
  std::vector<Answer> answers;
  bool shuffle = false;

  std::size_t correct_index() const;

  bool operator==(const Question&) const = default;
};

struct ParameterSpec {
  Rational min;
  Rational max;
  Rational step{1};

  // Number of grid points min, min+step, ... <= max.
  std::int64_t grid_size() const;
  Rational value_at(std::int64_t index) const;
};

struct AnswerExpression {
  std::string expression;
  bool correct = false;
};

// A parameterized question. Placeholders appear as {name} in the stem and as
// bare identifiers in the answer expressions.
struct QuestionTemplate {
  QuestionId id;
  NodeId lecture_id;
  std::string stem_template;
  std::string format = "plain";
  std::map<std::string, ParameterSpec> parameter_specs;
  std::vector<AnswerExpression> answer_expressions;
  bool shuffle = true;

  // Throws InvalidTemplate / NoCorrectAnswer / MultipleCorrectAnswers.
  void validate() const;
  std::size_t correct_index() const;
};

// Draws each placeholder from its grid with a generator seeded by `seed` and
// evaluates the answers exactly. A draw that divides by zero is redrawn, at
// most 100 attempts in total.
Question instantiate(const QuestionTemplate& tmpl, std::uint64_t seed);

// Identity unless question.shuffle; otherwise a seeded uniform permutation.
// Entry i is the canonical answer index shown at position i.
std::vector<std::size_t> presented_order(const Question& question, std::uint64_t seed);

struct QuestionStats {
  std::uint64_t times_allocated = 0;
  std::uint64_t times_answered = 0;
  std::uint64_t times_correct = 0;

  bool operator==(const QuestionStats&) const = default;
};

enum class StatsEvent { Allocated, AnsweredCorrect, AnsweredWrong };

// Per-question counters; 0 <= correct <= answered <= allocated always holds.
class StatsTable {
 public:
  QuestionStats bump(const QuestionId& id, StatsEvent event);
  QuestionStats get(const QuestionId& id) const;
  const std::map<QuestionId, QuestionStats>& all() const { return stats_; }

  bool operator==(const StatsTable&) const = default;

 private:
  std::map<QuestionId, QuestionStats> stats_;
};

// Stores plain questions and templates, each attached to a lecture. A template
// is one allocatable item: its stats accrue under the template id and every
// serving renders a fresh instance.
class ItemBank {
 public:
  QuestionId add_question(const ContentTree& content, const NodeId& lecture_id, std::string stem,
                          std::vector<Answer> answers, bool shuffle,
                          std::optional<QuestionId> id = std::nullopt, std::string format = "plain");
  QuestionId add_template(const ContentTree& content, QuestionTemplate tmpl);

  bool contains(const QuestionId& id) const;
  bool is_template(const QuestionId& id) const { return templates_.count(id) != 0; }
  const Question& question(const QuestionId& id) const;
  const QuestionTemplate& question_template(const QuestionId& id) const;
  const NodeId& lecture_of(const QuestionId& id) const;

  // Items of a lecture, sorted by id.
  std::vector<QuestionId> items_in_lecture(const NodeId& lecture_id) const;
  std::size_t size() const { return questions_.size() + templates_.size(); }

  // Concrete question for serving: the stored question, or the template instance for `seed`.
  Question render(const QuestionId& id, std::uint64_t seed) const;
  std::size_t correct_index(const QuestionId& id) const;
  std::size_t answer_count(const QuestionId& id) const;

  // Import records: {id, lecture, stem, format, shuffle, answers:[{text, correct}]} or
  // {id, lecture, stem_template, parameter_specs, answer_expressions}.
  nlohmann::json to_json() const;
  static ItemBank from_json(const ContentTree& content, const nlohmann::json& records);

 private:
  void check_lecture(const ContentTree& content, const NodeId& lecture_id) const;
  void check_fresh(const QuestionId& id) const;

  std::map<QuestionId, Question> questions_;
  std::map<QuestionId, QuestionTemplate> templates_;
  std::map<NodeId, std::vector<QuestionId>> by_lecture_;
  std::uint64_t next_id_ = 1;
};

}  // namespace tutorweb
