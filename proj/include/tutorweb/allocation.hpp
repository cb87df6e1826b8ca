#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tutorweb/item_bank.hpp"

namespace tutorweb {

using StudentId = std::string;

// Grades use only the most recent answers in a lecture.
inline constexpr std::size_t kGradeWindow = 8;
inline constexpr int kMaxBucket = static_cast<int>(kGradeWindow);

struct Difficulty {
  double value = 0.5;
};

struct AllocationPolicy {
  double k = 8.0;  // PMF concentration
  bool exclude_last_served = true;
  double cold_start_difficulty = 0.5;

  void validate() const;
};

// 1 - correct/answered, or the policy's cold-start value before any answer.
Difficulty difficulty(const QuestionStats& stats, const AllocationPolicy& policy);

// Items ordered easiest first; equal difficulties fall back to ascending id.
std::vector<QuestionId> rank_by_difficulty(std::vector<QuestionId> items, const StatsTable& stats,
                                           const AllocationPolicy& policy);

// Allocation probabilities over ranks 1..m (index 0 = easiest) for a student
// whose last window holds `bucket` correct answers. Discretized Beta kernel on
// rank midpoints x_r = (r - 0.5)/m with exponents k*g/8 and k*(1 - g/8).
std::vector<double> allocation_pmf(std::size_t item_count, int bucket, const AllocationPolicy& policy);

struct AnswerRecord {
  QuestionId question_id;
  bool correct = false;
  double points = 0.0;
  std::uint64_t timestamp = 0;

  bool operator==(const AnswerRecord&) const = default;
};

inline double points_for(bool correct) { return correct ? 1.0 : -0.5; }

struct StudentLectureState {
  StudentId student_id;
  NodeId lecture_id;
  std::vector<AnswerRecord> history;
  std::optional<QuestionId> last_served;
  // Allocated and not yet answered; one answer per allocation.
  std::optional<QuestionId> pending;

  bool operator==(const StudentLectureState&) const = default;
};

// Sum of points over the last min(8, n) records.
double grade(std::span<const AnswerRecord> history);
// Correct answers among the last min(8, n) records.
int grade_bucket(std::span<const AnswerRecord> history);
inline double grade(const StudentLectureState& s) { return grade(std::span(s.history)); }
inline int grade_bucket(const StudentLectureState& s) { return grade_bucket(std::span(s.history)); }

struct Allocation {
  QuestionId question_id;
  std::size_t rank = 0;  // 1-based, in the ranking used for the draw
  std::size_t item_count = 0;
};

struct AnswerOutcome {
  bool correct = false;
  double points = 0.0;
  double grade = 0.0;
  int bucket = 0;
};

using StateKey = std::pair<StudentId, NodeId>;

// Everything the answer log determines: counters and per-student windows.
struct EngineState {
  StatsTable stats;
  std::map<StateKey, StudentLectureState> students;
  std::uint64_t clock = 0;

  bool operator==(const EngineState&) const = default;
};

// Rank-based allocation over one item bank. The choose_* / apply_* pairs split
// each mutation into a pure decision and its effect so a caller can log the
// decision before applying it; next_question/record_answer do both.
class AllocationEngine {
 public:
  explicit AllocationEngine(const ItemBank& bank, AllocationPolicy policy = {});

  const AllocationPolicy& policy() const { return policy_; }
  const ItemBank& bank() const { return *bank_; }

  std::vector<QuestionId> rank_items(const NodeId& lecture_id) const;

  Allocation choose_question(const StudentId& student, const NodeId& lecture_id,
                             std::uint64_t seed) const;
  void apply_allocation(const StudentId& student, const NodeId& lecture_id,
                        const QuestionId& question_id);
  Allocation next_question(const StudentId& student, const NodeId& lecture_id, std::uint64_t seed);

  // Validates and judges an answer (index in canonical order) without mutating.
  bool judge_answer(const StudentId& student, const NodeId& lecture_id,
                    const QuestionId& question_id, std::size_t answer_index) const;
  AnswerOutcome apply_answer(const StudentId& student, const NodeId& lecture_id,
                             const QuestionId& question_id, bool correct);
  AnswerOutcome record_answer(const StudentId& student, const NodeId& lecture_id,
                              const QuestionId& question_id, std::size_t answer_index);

  // Empty state for students that have not touched the lecture.
  StudentLectureState student_state(const StudentId& student, const NodeId& lecture_id) const;
  Difficulty difficulty_of(const QuestionId& question_id) const;

  const EngineState& state() const { return state_; }
  void restore(EngineState state) { state_ = std::move(state); }

 private:
  void check_answerable(const StudentId& student, const NodeId& lecture_id,
                        const QuestionId& question_id) const;

  const ItemBank* bank_;
  AllocationPolicy policy_;
  EngineState state_;
};

}  // namespace tutorweb
