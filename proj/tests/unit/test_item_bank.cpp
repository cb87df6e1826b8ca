#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "tutorweb/error.hpp"
#include "tutorweb/item_bank.hpp"
#include "tutorweb/rational.hpp"

using namespace tutorweb;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::ParseError;
}

ContentTree one_lecture() {
  ContentTree tree;
  tree.add_node(std::nullopt, NodeKind::Department, "d", "", "plain", "d");
  tree.add_node(NodeId("d"), NodeKind::Course, "c", "", "plain", "c");
  tree.add_node(NodeId("c"), NodeKind::Tutorial, "t", "", "plain", "t");
  tree.add_node(NodeId("t"), NodeKind::Lecture, "L", "", "plain", "L");
  tree.add_node(NodeId("t"), NodeKind::Lecture, "M", "", "plain", "M");
  return tree;
}

QuestionTemplate sum_template() {
  QuestionTemplate t;
  t.id = "sum";
  t.lecture_id = "L";
  t.stem_template = "What is {a} + {b}?";
  t.parameter_specs = {{"a", {1, 5, 1}}, {"b", {1, 5, 1}}};
  t.answer_expressions = {{"a + b", true}, {"a - b", false}, {"a * b + 1", false}};
  return t;
}

// Parses the two integers out of "What is A + B?".
std::pair<int, int> operands(const std::string& stem) {
  int a = 0, b = 0;
  REQUIRE(std::sscanf(stem.c_str(), "What is %d + %d?", &a, &b) == 2);
  return {a, b};
}

}  // namespace

TEST_CASE("rational arithmetic is exact and normalized") {
  CHECK(Rational(2, 4) == Rational(1, 2));
  CHECK(Rational(1, -2) == Rational(-1, 2));
  CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
  CHECK(Rational(1, 3) * Rational(3) == Rational(1));
  CHECK(Rational(1, 3) / Rational(2, 3) == Rational(1, 2));
  CHECK(-Rational(3, 4) == Rational(-3, 4));
  CHECK(Rational(1, 3) < Rational(1, 2));
  CHECK(Rational::parse("-2.75") == Rational(-11, 4));
  CHECK(Rational::parse("1e3") == Rational(1000));
  CHECK(Rational::parse("3/9") == Rational(1, 3));
  CHECK(Rational(5).to_string() == "5");
  CHECK(Rational(-11, 4).to_string() == "-2.75");
  CHECK(Rational(1, 3).to_string() == "1/3");
  CHECK(Rational::floor_div(Rational(7), Rational(2)) == 3);
  CHECK(Rational::floor_div(Rational(-1), Rational(2)) == -1);
  CHECK(code_of([] { (void)(Rational(1) / Rational(0)); }) == ErrorCode::ExpressionError);
  CHECK(code_of([] { (void)Rational(1, 0); }) == ErrorCode::ExpressionError);
  const Rational big(std::numeric_limits<std::int64_t>::max() / 2 + 1);
  CHECK(code_of([&] { (void)(big * Rational(4)); }) == ErrorCode::ExpressionError);
  CHECK(code_of([&] { (void)(big + big); }) == ErrorCode::ExpressionError);
}

TEST_CASE("expression evaluation") {
  const Bindings b = {{"a", Rational(3)}, {"b", Rational(4)}};
  CHECK(evaluate_expression("a + b * 2", b) == Rational(11));
  CHECK(evaluate_expression("(a + b) * 2", b) == Rational(14));
  CHECK(evaluate_expression("-a / b", b) == Rational(-3, 4));
  CHECK(evaluate_expression("a - -b", b) == Rational(7));
  CHECK(evaluate_expression("0.5 * b", b) == Rational(2));
  CHECK(code_of([&] { evaluate_expression("a / (b - 4)", b); }) == ErrorCode::ExpressionError);
  CHECK(code_of([&] { evaluate_expression("c + 1", b); }) == ErrorCode::ExpressionError);
  CHECK(code_of([&] { evaluate_expression("a +", b); }) == ErrorCode::ExpressionError);
  CHECK(code_of([&] { evaluate_expression("(a", b); }) == ErrorCode::ExpressionError);
  CHECK(expression_identifiers("b * a + a / (c - c)") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("expression evaluation agrees with a double oracle on random inputs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> small(-20, 20);
  for (int i = 0; i < 500; ++i) {
    const int a = small(rng), b = small(rng), c = small(rng);
    if (c == 0) continue;
    const Bindings bind = {{"a", Rational(a)}, {"b", Rational(b)}, {"c", Rational(c)}};
    const double expect = (a + b) * 1.0 / c - a * b;
    CHECK(evaluate_expression("(a + b) / c - a * b", bind).to_double() == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("add_question") {
  auto tree = one_lecture();
  ItemBank bank;
  const auto id = bank.add_question(tree, "L", "2+2?", {{"4", true}, {"5", false}, {"3", false}, {"22", false}}, true);
  CHECK(bank.contains(id));
  CHECK(bank.items_in_lecture("L") == std::vector<QuestionId>{id});
  CHECK(bank.correct_index(id) == 0);
  CHECK(bank.answer_count(id) == 4);
  StatsTable stats;
  CHECK(stats.get(id) == QuestionStats{0, 0, 0});

  CHECK(code_of([&] { bank.add_question(tree, "L", "?", {{"a", false}, {"b", false}}, false); }) ==
        ErrorCode::NoCorrectAnswer);
  CHECK(code_of([&] { bank.add_question(tree, "L", "?", {{"a", true}, {"b", true}}, false); }) ==
        ErrorCode::MultipleCorrectAnswers);
  CHECK(code_of([&] { bank.add_question(tree, "L", "?", {{"a", true}}, false); }) == ErrorCode::TooFewAnswers);
  CHECK(code_of([&] { bank.add_question(tree, "nope", "?", {{"a", true}, {"b", false}}, false); }) ==
        ErrorCode::UnknownLecture);
  CHECK(code_of([&] { bank.add_question(tree, "t", "?", {{"a", true}, {"b", false}}, false); }) ==
        ErrorCode::UnknownLecture);
  CHECK(code_of([&] { bank.add_question(tree, "L", "?", {{"a", true}, {"b", false}}, false, id); }) ==
        ErrorCode::DuplicateId);
  CHECK(bank.size() == 1);
  CHECK(code_of([&] { bank.question("ghost"); }) == ErrorCode::UnknownQuestion);
}

TEST_CASE("items_in_lecture is sorted and per lecture") {
  auto tree = one_lecture();
  ItemBank bank;
  bank.add_question(tree, "L", "?", {{"a", true}, {"b", false}}, false, std::string("zeta"));
  bank.add_question(tree, "M", "?", {{"a", true}, {"b", false}}, false, std::string("mid"));
  bank.add_question(tree, "L", "?", {{"a", true}, {"b", false}}, false, std::string("alpha"));
  bank.add_template(tree, sum_template());
  CHECK(bank.items_in_lecture("L") == std::vector<QuestionId>{"alpha", "sum", "zeta"});
  CHECK(bank.items_in_lecture("M") == std::vector<QuestionId>{"mid"});
  CHECK(bank.items_in_lecture("t").empty());
}

TEST_CASE("instantiate fills placeholders and evaluates the correct answer") {
  const auto t = sum_template();
  const auto q = instantiate(t, 42);
  const auto [a, b] = operands(q.stem);
  CHECK(a >= 1);
  CHECK(a <= 5);
  CHECK(b >= 1);
  CHECK(b <= 5);
  CHECK(q.answers[q.correct_index()].text == std::to_string(a + b));
  CHECK(q.answers[1].text == std::to_string(a - b));
  CHECK(q.id == "sum");
  CHECK(q.lecture_id == "L");
  CHECK(instantiate(t, 42) == q);
}

TEST_CASE("instantiate covers the whole parameter grid") {
  const auto t = sum_template();
  std::set<std::pair<int, int>> seen;
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    const auto q = instantiate(t, seed);
    const auto ab = operands(q.stem);
    seen.insert(ab);
    CHECK(q.answers[0].text == std::to_string(ab.first + ab.second));
  }
  CHECK(seen.size() == 25);
}

TEST_CASE("instantiate handles fractional grids") {
  QuestionTemplate t;
  t.id = "half";
  t.lecture_id = "L";
  t.stem_template = "Double {x}";
  t.parameter_specs = {{"x", {Rational(1, 2), Rational(2), Rational(1, 2)}}};
  t.answer_expressions = {{"2 * x", true}, {"x / 3", false}};
  CHECK(t.parameter_specs.at("x").grid_size() == 4);
  std::set<std::string> stems;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto q = instantiate(t, seed);
    stems.insert(q.stem);
    if (q.stem == "Double 1.5") {
      CHECK(q.answers[0].text == "3");
      CHECK(q.answers[1].text == "0.5");
    }
    if (q.stem == "Double 0.5") CHECK(q.answers[1].text == "1/6");
  }
  CHECK(stems == std::set<std::string>{"Double 0.5", "Double 1", "Double 1.5", "Double 2"});
}

TEST_CASE("division by zero at the drawn values is redrawn") {
  QuestionTemplate t;
  t.id = "inv";
  t.lecture_id = "L";
  t.stem_template = "Invert {x}";
  t.parameter_specs = {{"x", {0, 3, 1}}};
  t.answer_expressions = {{"1 / x", true}, {"x", false}};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto q = instantiate(t, seed);
    CHECK(q.stem != "Invert 0");
  }
  t.parameter_specs = {{"x", {0, 0, 1}}};
  CHECK(code_of([&] { instantiate(t, 1); }) == ErrorCode::ExpressionError);
}

TEST_CASE("template validation") {
  auto t = sum_template();
  t.answer_expressions[1].correct = true;
  CHECK(code_of([&] { t.validate(); }) == ErrorCode::MultipleCorrectAnswers);
  t = sum_template();
  t.stem_template = "What is {a} + {c}?";
  CHECK(code_of([&] { t.validate(); }) == ErrorCode::InvalidTemplate);
  t = sum_template();
  t.answer_expressions[2].expression = "a * z";
  CHECK(code_of([&] { t.validate(); }) == ErrorCode::InvalidTemplate);
  t = sum_template();
  t.parameter_specs["a"].step = 0;
  CHECK(code_of([&] { t.validate(); }) == ErrorCode::InvalidTemplate);
  t = sum_template();
  t.answer_expressions.resize(1);
  CHECK(code_of([&] { t.validate(); }) == ErrorCode::TooFewAnswers);
}

TEST_CASE("presented_order") {
  Question q;
  q.answers = {{"a", true}, {"b", false}, {"c", false}};
  q.shuffle = false;
  CHECK(presented_order(q, 123) == std::vector<std::size_t>{0, 1, 2});

  q.shuffle = true;
  std::map<std::vector<std::size_t>, int> counts;
  for (std::uint64_t seed = 1; seed <= 6000; ++seed) ++counts[presented_order(q, seed)];
  CHECK(counts.size() == 6);
  for (const auto& [perm, n] : counts) {
    CHECK(std::abs(n / 6000.0 - 1.0 / 6.0) <= 0.02);
    auto sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::size_t>{0, 1, 2});
  }
  CHECK(presented_order(q, 99) == presented_order(q, 99));
}

TEST_CASE("bump_stats") {
  StatsTable t;
  CHECK(t.bump("q", StatsEvent::Allocated) == QuestionStats{1, 0, 0});
  CHECK(t.bump("q", StatsEvent::AnsweredCorrect) == QuestionStats{1, 1, 1});
  CHECK(code_of([&] { t.bump("q", StatsEvent::AnsweredWrong); }) == ErrorCode::AnswerWithoutAllocation);
  CHECK(code_of([&] { t.bump("fresh", StatsEvent::AnsweredCorrect); }) == ErrorCode::AnswerWithoutAllocation);
  CHECK(t.get("q") == QuestionStats{1, 1, 1});
}

TEST_CASE("stats invariant holds under random event streams") {
  std::mt19937_64 rng(5);
  StatsTable t;
  for (int i = 0; i < 5000; ++i) {
    const auto id = "q" + std::to_string(rng() % 7);
    const auto ev = static_cast<StatsEvent>(rng() % 3);
    try {
      t.bump(id, ev);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::AnswerWithoutAllocation);
    }
    const auto s = t.get(id);
    CHECK(s.times_correct <= s.times_answered);
    CHECK(s.times_answered <= s.times_allocated);
  }
}

TEST_CASE("item bank json round-trip") {
  auto tree = one_lecture();
  ItemBank bank;
  bank.add_question(tree, "L", "Pick", {{"x", false}, {"y", true}}, false, std::string("p1"), "latex");
  auto t = sum_template();
  t.parameter_specs["b"] = {Rational(1, 2), Rational(5, 2), Rational(1, 2)};
  bank.add_template(tree, t);
  const auto j = bank.to_json();
  const auto back = ItemBank::from_json(tree, j);
  CHECK(back.to_json() == j);
  CHECK(back.is_template("sum"));
  CHECK(back.question("p1").format == "latex");
  CHECK(back.render("sum", 3) == bank.render("sum", 3));
  CHECK(back.render("p1", 3) == bank.question("p1"));
  CHECK(code_of([&] { ItemBank::from_json(tree, nlohmann::json::parse(R"([{"id":"x"}])")); }) ==
        ErrorCode::ParseError);
}
