#include "tutorweb/trial_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "tutorweb/error.hpp"
#include "tutorweb/seed.hpp"

namespace tutorweb {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

std::string_view to_string(Treatment t) {
  return t == Treatment::TutorWeb ? "tutorweb" : "traditional";
}

std::string_view to_string(MathBackground m) { return m == MathBackground::Strong ? "strong" : "weak"; }

Treatment parse_treatment(std::string_view text) {
  if (text == "tutorweb") return Treatment::TutorWeb;
  if (text == "traditional") return Treatment::Traditional;
  throw Error(ErrorCode::ParseError, "unknown treatment '" + std::string(text) + "'");
}

MathBackground parse_math_background(std::string_view text) {
  if (text == "strong") return MathBackground::Strong;
  if (text == "weak") return MathBackground::Weak;
  throw Error(ErrorCode::ParseError, "unknown math background '" + std::string(text) + "'");
}

DataFrame to_frame(const TrialDataset& records) {
  std::vector<std::string> treatment, math, exam, student;
  std::vector<double> score;
  for (const auto& r : records) {
    treatment.emplace_back(to_string(r.treatment));
    math.emplace_back(to_string(r.math));
    exam.push_back(std::to_string(r.exam));
    student.push_back(r.student);
    score.push_back(r.score);
  }
  DataFrame frame;
  frame.add_factor("treatment", std::move(treatment));
  frame.add_factor("math", std::move(math));
  frame.add_factor("exam", std::move(exam));
  frame.add_factor("student", std::move(student));
  frame.set_response(std::move(score));
  return frame;
}

std::string write_trial_records(const TrialDataset& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::json line = {{"student", r.student},
                           {"treatment", std::string(to_string(r.treatment))},
                           {"math", std::string(to_string(r.math))},
                           {"exam", r.exam},
                           {"score", r.score}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

TrialDataset read_trial_records(std::string_view text) {
  TrialDataset records;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      TrialRecord r;
      r.student = j.at("student").is_string() ? j.at("student").get<std::string>() : j.at("student").dump();
      r.treatment = parse_treatment(j.at("treatment").get<std::string>());
      r.math = parse_math_background(j.at("math").get<std::string>());
      r.exam = j.at("exam").get<int>();
      r.score = j.at("score").get<double>();
      if (r.exam < 1 || r.exam > kPeriods) throw Error(ErrorCode::ParseError, "exam outside 1..4");
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::vector<std::pair<std::string, int>> keys;
  for (const auto& r : records) keys.emplace_back(r.student, r.exam);
  std::sort(keys.begin(), keys.end());
  if (std::adjacent_find(keys.begin(), keys.end()) != keys.end()) {
    throw Error(ErrorCode::ParseError, "more than one record for a (student, exam) pair");
  }
  return records;
}

std::size_t CrossoverAssignment::group_size(Treatment first_period) const {
  return static_cast<std::size_t>(std::count_if(
      arms.begin(), arms.end(), [&](const CrossoverArm& a) { return a.periods[0] == first_period; }));
}

CrossoverAssignment assign_crossover(const std::vector<std::string>& student_ids, std::uint64_t seed) {
  const std::size_t n = student_ids.size();
  if (n < 2) throw Error(ErrorCode::TooFewStudents, "crossover needs at least 2 students");
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  // With odd n a fair coin decides which group takes the extra student.
  const std::size_t first_group = n / 2 + (n % 2 == 1 && (rng() & 1U) ? 1 : 0);

  constexpr std::array<Treatment, kPeriods> kTutorWebFirst{Treatment::TutorWeb, Treatment::Traditional,
                                                           Treatment::TutorWeb, Treatment::Traditional};
  constexpr std::array<Treatment, kPeriods> kWrittenFirst{Treatment::Traditional, Treatment::TutorWeb,
                                                          Treatment::Traditional, Treatment::TutorWeb};
  CrossoverAssignment assignment;
  assignment.arms.resize(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t i = order[pos];
    assignment.arms[i] = {student_ids[i], pos < first_group ? kTutorWebFirst : kWrittenFirst};
  }
  return assignment;
}

void SimParams::validate() const {
  if (n_students < 2) throw Error(ErrorCode::TooFewStudents, "n_students must be >= 2");
  if (n_periods != kPeriods) throw Error(ErrorCode::InvalidParams, "the crossover design has 4 periods");
  if (!(student_sd >= 0.0) || !(noise_sd >= 0.0)) throw Error(ErrorCode::InvalidParams, "sds must be >= 0");
  if (!(strong_fraction >= 0.0 && strong_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidParams, "strong_fraction must lie in [0, 1]");
  }
  if (!(score_min <= score_max)) throw Error(ErrorCode::InvalidParams, "score_min > score_max");
}

nlohmann::json SimParams::to_json() const {
  return {{"n_students", n_students},
          {"n_periods", n_periods},
          {"baseline", baseline},
          {"treatment_effect", treatment_effect},
          {"math_effect", math_effect},
          {"exam_effects", exam_effects},
          {"student_sd", student_sd},
          {"noise_sd", noise_sd},
          {"strong_fraction", strong_fraction},
          {"score_min", score_min},
          {"score_max", score_max},
          {"seed", seed}};
}

SimParams SimParams::from_json(const nlohmann::json& j) {
  SimParams p;
  p.n_students = j.value("n_students", p.n_students);
  p.n_periods = j.value("n_periods", p.n_periods);
  p.baseline = j.value("baseline", p.baseline);
  p.treatment_effect = j.value("treatment_effect", p.treatment_effect);
  p.math_effect = j.value("math_effect", p.math_effect);
  if (j.contains("exam_effects")) p.exam_effects = j.at("exam_effects").get<std::array<double, kPeriods>>();
  p.student_sd = j.value("student_sd", p.student_sd);
  p.noise_sd = j.value("noise_sd", p.noise_sd);
  p.strong_fraction = j.value("strong_fraction", p.strong_fraction);
  p.score_min = j.value("score_min", p.score_min);
  p.score_max = j.value("score_max", p.score_max);
  p.seed = j.value("seed", p.seed);
  p.validate();
  return p;
}

std::vector<SimStudent> make_cohort(const SimParams& params) {
  params.validate();
  std::mt19937_64 rng(mix_seed(params.seed, 1));
  std::bernoulli_distribution strong(params.strong_fraction);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<SimStudent> cohort;
  for (int i = 1; i <= params.n_students; ++i) {
    SimStudent s;
    s.id = std::to_string(i);
    s.math = strong(rng) ? MathBackground::Strong : MathBackground::Weak;
    s.theta = (s.math == MathBackground::Strong ? 0.5 : -0.5) + unit(rng);
    cohort.push_back(std::move(s));
  }
  return cohort;
}

double response_probability(double theta, double difficulty) {
  const double d = std::clamp(difficulty, 0.01, 0.99);
  return logistic(theta - std::log(d / (1.0 - d)));
}

bool simulate_response(double theta, double difficulty, std::mt19937_64& rng) {
  std::bernoulli_distribution correct(response_probability(theta, difficulty));
  return correct(rng);
}

std::vector<SessionStep> simulate_quiz_session(const SimStudent& student, const NodeId& lecture_id,
                                               std::size_t n_questions, AllocationEngine& engine,
                                               std::uint64_t seed) {
  std::vector<SessionStep> trace;
  trace.reserve(n_questions);
  std::mt19937_64 responses(mix_seed(seed, 0xa11ce));
  for (std::size_t i = 0; i < n_questions; ++i) {
    const auto allocation = engine.next_question(student.id, lecture_id, mix_seed(seed, i));
    const double d = engine.difficulty_of(allocation.question_id).value;
    const bool correct = simulate_response(student.theta, d, responses);
    const std::size_t right = engine.bank().correct_index(allocation.question_id);
    const std::size_t chosen = correct ? right : (right == 0 ? 1 : 0);
    const auto outcome = engine.record_answer(student.id, lecture_id, allocation.question_id, chosen);
    trace.push_back({allocation.question_id, allocation.rank, allocation.item_count, outcome.correct,
                     outcome.grade, outcome.bucket});
  }
  return trace;
}

TrialDataset simulate_exam_scores(const std::vector<SimStudent>& cohort,
                                  const CrossoverAssignment& assignment, const SimParams& params) {
  params.validate();
  std::map<std::string, const SimStudent*> by_id;
  for (const auto& s : cohort) by_id[s.id] = &s;
  std::mt19937_64 rng(mix_seed(params.seed, 2));
  std::normal_distribution<double> unit(0.0, 1.0);
  TrialDataset data;
  data.reserve(assignment.arms.size() * kPeriods);
  for (const auto& arm : assignment.arms) {
    auto it = by_id.find(arm.student);
    if (it == by_id.end()) throw Error(ErrorCode::InvalidParams, "assignment names unknown student " + arm.student);
    const SimStudent& s = *it->second;
    const double offset = params.student_sd * unit(rng);
    for (int k = 0; k < kPeriods; ++k) {
      const Treatment t = arm.periods[static_cast<std::size_t>(k)];
      double y = params.baseline + params.exam_effects[static_cast<std::size_t>(k)] + offset +
                 params.noise_sd * unit(rng);
      if (t == Treatment::TutorWeb) y += params.treatment_effect;
      if (s.math == MathBackground::Strong) y += params.math_effect;
      data.push_back({s.id, t, s.math, k + 1, std::clamp(y, params.score_min, params.score_max)});
    }
  }
  return data;
}

TrialResult run_trial(const SimParams& params, double alpha) {
  const auto cohort = make_cohort(params);
  std::vector<std::string> ids;
  for (const auto& s : cohort) ids.push_back(s.id);
  const auto assignment = assign_crossover(ids, mix_seed(params.seed, 3));
  TrialResult result;
  result.data = simulate_exam_scores(cohort, assignment, params);
  const auto frame = to_frame(result.data);
  result.elimination = backward_eliminate(frame, ModelSpec::crossover(), alpha);
  result.table = result.elimination.initial;
  return result;
}

}  // namespace tutorweb
