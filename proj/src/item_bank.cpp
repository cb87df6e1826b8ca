#include "tutorweb/item_bank.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "tutorweb/error.hpp"

namespace tutorweb {

namespace {

constexpr int kMaxDrawAttempts = 100;

std::size_t single_correct_index(const std::vector<bool>& flags) {
  const auto n = std::count(flags.begin(), flags.end(), true);
  if (n == 0) throw Error(ErrorCode::NoCorrectAnswer, "no answer is marked correct");
  if (n > 1) throw Error(ErrorCode::MultipleCorrectAnswers, std::to_string(n) + " answers marked correct");
  return static_cast<std::size_t>(std::find(flags.begin(), flags.end(), true) - flags.begin());
}

std::vector<std::string> stem_placeholders(const std::string& stem) {
  std::vector<std::string> names;
  std::size_t pos = 0;
  while ((pos = stem.find('{', pos)) != std::string::npos) {
    const auto close = stem.find('}', pos);
    if (close == std::string::npos) throw Error(ErrorCode::InvalidTemplate, "unterminated placeholder");
    names.push_back(stem.substr(pos + 1, close - pos - 1));
    pos = close + 1;
  }
  return names;
}

std::string fill_stem(const std::string& stem, const Bindings& values) {
  std::string out;
  std::size_t pos = 0;
  for (;;) {
    const auto open = stem.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = stem.find('}', open);
    out.append(stem, pos, open - pos);
    out += values.at(stem.substr(open + 1, close - open - 1)).to_string();
    pos = close + 1;
  }
  out.append(stem, pos, std::string::npos);
  return out;
}

Rational rational_from_json(const nlohmann::json& value) {
  if (value.is_string()) return Rational::parse(value.get<std::string>());
  if (value.is_number_integer()) return Rational(value.get<std::int64_t>());
  if (value.is_number()) return Rational::parse(value.dump());
  throw Error(ErrorCode::ParseError, "expected a number");
}

nlohmann::json rational_to_json(const Rational& value) {
  if (value.den() == 1) return value.num();
  return value.to_string();
}

}  // namespace

std::size_t Question::correct_index() const {
  std::vector<bool> flags;
  for (const auto& a : answers) flags.push_back(a.correct);
  return single_correct_index(flags);
}

std::int64_t ParameterSpec::grid_size() const { return Rational::floor_div(max - min, step) + 1; }

Rational ParameterSpec::value_at(std::int64_t index) const { return min + step * Rational(index); }

void QuestionTemplate::validate() const {
  if (answer_expressions.size() < 2) throw Error(ErrorCode::TooFewAnswers, id);
  correct_index();
  for (const auto& [name, spec] : parameter_specs) {
    if (!(spec.step > Rational(0))) throw Error(ErrorCode::InvalidTemplate, name + ": step must be > 0");
    if (spec.max < spec.min) throw Error(ErrorCode::InvalidTemplate, name + ": min > max");
  }
  std::vector<std::string> used = stem_placeholders(stem_template);
  for (const auto& e : answer_expressions) {
    try {
      for (auto& name : expression_identifiers(e.expression)) used.push_back(std::move(name));
    } catch (const Error& err) {
      throw Error(ErrorCode::InvalidTemplate, err.what());
    }
  }
  for (const auto& name : used) {
    if (parameter_specs.count(name) == 0) {
      throw Error(ErrorCode::InvalidTemplate, "placeholder '" + name + "' has no parameter spec");
    }
  }
}

std::size_t QuestionTemplate::correct_index() const {
  std::vector<bool> flags;
  for (const auto& e : answer_expressions) flags.push_back(e.correct);
  return single_correct_index(flags);
}

Question instantiate(const QuestionTemplate& tmpl, std::uint64_t seed) {
  tmpl.validate();
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < kMaxDrawAttempts; ++attempt) {
    Bindings values;
    // std::map iteration gives a fixed, name-sorted draw order.
    for (const auto& [name, spec] : tmpl.parameter_specs) {
      std::uniform_int_distribution<std::int64_t> pick(0, spec.grid_size() - 1);
      values[name] = spec.value_at(pick(rng));
    }
    try {
      Question q;
      q.id = tmpl.id;
      q.lecture_id = tmpl.lecture_id;
      q.stem = fill_stem(tmpl.stem_template, values);
      q.format = tmpl.format;
      q.shuffle = tmpl.shuffle;
      for (const auto& e : tmpl.answer_expressions) {
        q.answers.push_back({evaluate_expression(e.expression, values).to_string(), e.correct});
      }
      return q;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::ExpressionError) throw;
    }
  }
  throw Error(ErrorCode::ExpressionError,
              tmpl.id + ": no valid draw in " + std::to_string(kMaxDrawAttempts) + " attempts");
}

std::vector<std::size_t> presented_order(const Question& question, std::uint64_t seed) {
  std::vector<std::size_t> order(question.answers.size());
  std::iota(order.begin(), order.end(), 0);
  if (question.shuffle) {
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
  }
  return order;
}

QuestionStats StatsTable::bump(const QuestionId& id, StatsEvent event) {
  auto& s = stats_[id];
  if (event == StatsEvent::Allocated) {
    ++s.times_allocated;
    return s;
  }
  if (s.times_answered + 1 > s.times_allocated) {
    throw Error(ErrorCode::AnswerWithoutAllocation, id);
  }
  ++s.times_answered;
  if (event == StatsEvent::AnsweredCorrect) ++s.times_correct;
  return s;
}

QuestionStats StatsTable::get(const QuestionId& id) const {
  auto it = stats_.find(id);
  return it == stats_.end() ? QuestionStats{} : it->second;
}

void ItemBank::check_lecture(const ContentTree& content, const NodeId& lecture_id) const {
  if (!content.is_lecture(lecture_id)) throw Error(ErrorCode::UnknownLecture, lecture_id);
}

void ItemBank::check_fresh(const QuestionId& id) const {
  if (id.empty()) throw Error(ErrorCode::ParseError, "empty question id");
  if (contains(id)) throw Error(ErrorCode::DuplicateId, id);
}

QuestionId ItemBank::add_question(const ContentTree& content, const NodeId& lecture_id,
                                  std::string stem, std::vector<Answer> answers, bool shuffle,
                                  std::optional<QuestionId> id, std::string format) {
  check_lecture(content, lecture_id);
  Question q{id.value_or(""), lecture_id, std::move(stem), std::move(format), std::move(answers), shuffle};
  if (q.answers.size() < 2) throw Error(ErrorCode::TooFewAnswers, "a question needs at least 2 answers");
  q.correct_index();
  if (!id) {
    do {
      q.id = "q" + std::to_string(next_id_++);
    } while (contains(q.id));
  }
  check_fresh(q.id);
  by_lecture_[lecture_id].push_back(q.id);
  const QuestionId out = q.id;
  questions_.emplace(out, std::move(q));
  return out;
}

QuestionId ItemBank::add_template(const ContentTree& content, QuestionTemplate tmpl) {
  check_lecture(content, tmpl.lecture_id);
  tmpl.validate();
  check_fresh(tmpl.id);
  by_lecture_[tmpl.lecture_id].push_back(tmpl.id);
  const QuestionId out = tmpl.id;
  templates_.emplace(out, std::move(tmpl));
  return out;
}

bool ItemBank::contains(const QuestionId& id) const {
  return questions_.count(id) != 0 || templates_.count(id) != 0;
}

const Question& ItemBank::question(const QuestionId& id) const {
  auto it = questions_.find(id);
  if (it == questions_.end()) throw Error(ErrorCode::UnknownQuestion, id);
  return it->second;
}

const QuestionTemplate& ItemBank::question_template(const QuestionId& id) const {
  auto it = templates_.find(id);
  if (it == templates_.end()) throw Error(ErrorCode::UnknownTemplate, id);
  return it->second;
}

const NodeId& ItemBank::lecture_of(const QuestionId& id) const {
  if (auto it = templates_.find(id); it != templates_.end()) return it->second.lecture_id;
  return question(id).lecture_id;
}

std::vector<QuestionId> ItemBank::items_in_lecture(const NodeId& lecture_id) const {
  auto it = by_lecture_.find(lecture_id);
  if (it == by_lecture_.end()) return {};
  auto items = it->second;
  std::sort(items.begin(), items.end());
  return items;
}

Question ItemBank::render(const QuestionId& id, std::uint64_t seed) const {
  if (auto it = templates_.find(id); it != templates_.end()) return instantiate(it->second, seed);
  return question(id);
}

std::size_t ItemBank::correct_index(const QuestionId& id) const {
  if (auto it = templates_.find(id); it != templates_.end()) return it->second.correct_index();
  return question(id).correct_index();
}

std::size_t ItemBank::answer_count(const QuestionId& id) const {
  if (auto it = templates_.find(id); it != templates_.end()) return it->second.answer_expressions.size();
  return question(id).answers.size();
}

nlohmann::json ItemBank::to_json() const {
  auto records = nlohmann::json::array();
  for (const auto& [id, q] : questions_) {
    auto answers = nlohmann::json::array();
    for (const auto& a : q.answers) answers.push_back({{"text", a.text}, {"correct", a.correct}});
    records.push_back({{"id", id},
                       {"lecture", q.lecture_id},
                       {"stem", q.stem},
                       {"format", q.format},
                       {"shuffle", q.shuffle},
                       {"answers", answers}});
  }
  for (const auto& [id, t] : templates_) {
    auto specs = nlohmann::json::object();
    for (const auto& [name, spec] : t.parameter_specs) {
      specs[name] = {{"min", rational_to_json(spec.min)},
                     {"max", rational_to_json(spec.max)},
                     {"step", rational_to_json(spec.step)}};
    }
    auto expressions = nlohmann::json::array();
    for (const auto& e : t.answer_expressions) {
      expressions.push_back({{"expression", e.expression}, {"correct", e.correct}});
    }
    records.push_back({{"id", id},
                       {"lecture", t.lecture_id},
                       {"stem_template", t.stem_template},
                       {"format", t.format},
                       {"shuffle", t.shuffle},
                       {"parameter_specs", specs},
                       {"answer_expressions", expressions}});
  }
  return records;
}

ItemBank ItemBank::from_json(const ContentTree& content, const nlohmann::json& records) {
  if (!records.is_array()) throw Error(ErrorCode::ParseError, "item records must be a list");
  ItemBank bank;
  for (const auto& r : records) {
    try {
      if (r.contains("stem_template")) {
        QuestionTemplate t;
        t.id = r.at("id").get<std::string>();
        t.lecture_id = r.at("lecture").get<std::string>();
        t.stem_template = r.at("stem_template").get<std::string>();
        t.format = r.value("format", "plain");
        t.shuffle = r.value("shuffle", true);
        for (const auto& [name, spec] : r.at("parameter_specs").items()) {
          t.parameter_specs[name] = {rational_from_json(spec.at("min")),
                                     rational_from_json(spec.at("max")),
                                     spec.contains("step") ? rational_from_json(spec.at("step")) : Rational(1)};
        }
        for (const auto& e : r.at("answer_expressions")) {
          t.answer_expressions.push_back({e.at("expression").get<std::string>(), e.value("correct", false)});
        }
        bank.add_template(content, std::move(t));
      } else {
        std::vector<Answer> answers;
        for (const auto& a : r.at("answers")) {
          answers.push_back({a.at("text").get<std::string>(), a.value("correct", false)});
        }
        bank.add_question(content, r.at("lecture").get<std::string>(), r.at("stem").get<std::string>(),
                          std::move(answers), r.value("shuffle", false), r.at("id").get<std::string>(),
                          r.value("format", "plain"));
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, std::string("item record: ") + e.what());
    }
  }
  return bank;
}

}  // namespace tutorweb
