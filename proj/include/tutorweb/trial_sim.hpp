#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tutorweb/allocation.hpp"
#include "tutorweb/anova.hpp"

namespace tutorweb {

enum class Treatment { TutorWeb, Traditional };
enum class MathBackground { Strong, Weak };

std::string_view to_string(Treatment t);
std::string_view to_string(MathBackground m);
Treatment parse_treatment(std::string_view text);
MathBackground parse_math_background(std::string_view text);

inline constexpr int kPeriods = 4;

struct TrialRecord {
  std::string student;
  Treatment treatment = Treatment::TutorWeb;
  MathBackground math = MathBackground::Strong;
  int exam = 1;  // 1..4
  double score = 0.0;

  bool operator==(const TrialRecord&) const = default;
};

using TrialDataset = std::vector<TrialRecord>;

// Factors treatment, math, exam, student; response = score.
DataFrame to_frame(const TrialDataset& records);

// Trial data file: one JSON record per line {student, treatment, math, exam, score}.
std::string write_trial_records(const TrialDataset& records);
TrialDataset read_trial_records(std::string_view text);

struct CrossoverArm {
  std::string student;
  std::array<Treatment, kPeriods> periods{};
};

// Group 1 gets (T,W,T,W), group 2 (W,T,W,T).
struct CrossoverAssignment {
  std::vector<CrossoverArm> arms;  // in input order

  std::size_t group_size(Treatment first_period) const;
};

CrossoverAssignment assign_crossover(const std::vector<std::string>& student_ids, std::uint64_t seed);

struct SimStudent {
  std::string id;
  double theta = 0.0;  // logit-scale ability
  MathBackground math = MathBackground::Strong;
};

struct SimParams {
  int n_students = 184;
  int n_periods = kPeriods;
  double baseline = 5.0;
  double treatment_effect = 0.0;
  double math_effect = 1.5;
  std::array<double, kPeriods> exam_effects{0.0, -0.4, 0.3, -0.6};
  double student_sd = 1.0;
  double noise_sd = 1.0;
  double strong_fraction = 0.5;
  double score_min = 0.0;
  double score_max = 10.0;
  std::uint64_t seed = 1;

  void validate() const;
  nlohmann::json to_json() const;
  static SimParams from_json(const nlohmann::json& j);
};

// Cohort with ids "1".."n", math background ~ Bernoulli(strong_fraction) and
// theta ~ N(+-0.5, 1) by background.
std::vector<SimStudent> make_cohort(const SimParams& params);

// P(correct) = logistic(theta - logit(d)), d clamped to [0.01, 0.99].
double response_probability(double theta, double difficulty);
bool simulate_response(double theta, double difficulty, std::mt19937_64& rng);

struct SessionStep {
  QuestionId question_id;
  std::size_t rank = 0;
  std::size_t item_count = 0;
  bool correct = false;
  double grade = 0.0;
  int bucket = 0;
};

// n_questions rounds of next_question -> simulate_response -> record_answer.
// Correctness is drawn against the engine's current empirical difficulty.
std::vector<SessionStep> simulate_quiz_session(const SimStudent& student, const NodeId& lecture_id,
                                               std::size_t n_questions, AllocationEngine& engine,
                                               std::uint64_t seed);

// score = baseline + effects + student offset + noise, clamped to the score range.
TrialDataset simulate_exam_scores(const std::vector<SimStudent>& cohort,
                                  const CrossoverAssignment& assignment, const SimParams& params);

struct TrialResult {
  TrialDataset data;
  AnovaTable table;
  EliminationResult elimination;
};

TrialResult run_trial(const SimParams& params, double alpha = 0.05);

}  // namespace tutorweb
