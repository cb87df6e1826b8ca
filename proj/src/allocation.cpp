#include "tutorweb/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tutorweb/error.hpp"

namespace tutorweb {

namespace {

std::span<const AnswerRecord> window(std::span<const AnswerRecord> history) {
  const std::size_t n = std::min(history.size(), kGradeWindow);
  return history.subspan(history.size() - n);
}

}  // namespace

void AllocationPolicy::validate() const {
  if (!(k > 0.0) || !std::isfinite(k)) throw Error(ErrorCode::InvalidPolicy, "k must be > 0");
  if (!(cold_start_difficulty >= 0.0 && cold_start_difficulty <= 1.0)) {
    throw Error(ErrorCode::InvalidPolicy, "cold_start_difficulty must lie in [0, 1]");
  }
}

Difficulty difficulty(const QuestionStats& stats, const AllocationPolicy& policy) {
  if (stats.times_answered == 0) return {policy.cold_start_difficulty};
  return {1.0 - static_cast<double>(stats.times_correct) / static_cast<double>(stats.times_answered)};
}

std::vector<QuestionId> rank_by_difficulty(std::vector<QuestionId> items, const StatsTable& stats,
                                           const AllocationPolicy& policy) {
  std::vector<std::pair<double, QuestionId>> keyed;
  keyed.reserve(items.size());
  for (auto& id : items) keyed.emplace_back(difficulty(stats.get(id), policy).value, std::move(id));
  std::sort(keyed.begin(), keyed.end());
  std::vector<QuestionId> ranked;
  ranked.reserve(keyed.size());
  for (auto& [d, id] : keyed) ranked.push_back(std::move(id));
  return ranked;
}

std::vector<double> allocation_pmf(std::size_t item_count, int bucket, const AllocationPolicy& policy) {
  if (item_count < 1) throw Error(ErrorCode::InvalidItemCount, "item count must be >= 1");
  if (bucket < 0 || bucket > kMaxBucket) {
    throw Error(ErrorCode::InvalidBucket, "bucket " + std::to_string(bucket) + " outside 0..8");
  }
  policy.validate();
  const double m = static_cast<double>(item_count);
  const double g = static_cast<double>(bucket) / kMaxBucket;
  const double a = policy.k * g;          // alpha - 1
  const double b = policy.k * (1.0 - g);  // beta - 1
  std::vector<double> log_w(item_count);
  for (std::size_t r = 1; r <= item_count; ++r) {
    // Both arms come from integer numerators so rank r and m+1-r swap exactly.
    const double x = (static_cast<double>(r) - 0.5) / m;
    const double one_minus_x = (m - static_cast<double>(r) + 0.5) / m;
    log_w[r - 1] = a * std::log(x) + b * std::log(one_minus_x);
  }
  const double peak = *std::max_element(log_w.begin(), log_w.end());
  std::vector<double> p(item_count);
  double total = 0.0;
  for (std::size_t i = 0; i < item_count; ++i) {
    p[i] = std::exp(log_w[i] - peak);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

double grade(std::span<const AnswerRecord> history) {
  double sum = 0.0;
  for (const auto& r : window(history)) sum += r.points;
  return sum;
}

int grade_bucket(std::span<const AnswerRecord> history) {
  const auto w = window(history);
  return static_cast<int>(std::count_if(w.begin(), w.end(), [](const AnswerRecord& r) { return r.correct; }));
}

AllocationEngine::AllocationEngine(const ItemBank& bank, AllocationPolicy policy)
    : bank_(&bank), policy_(policy) {
  policy_.validate();
}

std::vector<QuestionId> AllocationEngine::rank_items(const NodeId& lecture_id) const {
  auto items = bank_->items_in_lecture(lecture_id);
  if (items.empty()) throw Error(ErrorCode::EmptyLecture, lecture_id);
  return rank_by_difficulty(std::move(items), state_.stats, policy_);
}

StudentLectureState AllocationEngine::student_state(const StudentId& student,
                                                    const NodeId& lecture_id) const {
  auto it = state_.students.find({student, lecture_id});
  if (it != state_.students.end()) return it->second;
  return {student, lecture_id, {}, std::nullopt, std::nullopt};
}

Difficulty AllocationEngine::difficulty_of(const QuestionId& question_id) const {
  return difficulty(state_.stats.get(question_id), policy_);
}

Allocation AllocationEngine::choose_question(const StudentId& student, const NodeId& lecture_id,
                                             std::uint64_t seed) const {
  const auto ranked = rank_items(lecture_id);
  const auto state = student_state(student, lecture_id);
  auto weights = allocation_pmf(ranked.size(), grade_bucket(state), policy_);
  if (policy_.exclude_last_served && ranked.size() >= 2 && state.last_served) {
    auto it = std::find(ranked.begin(), ranked.end(), *state.last_served);
    if (it != ranked.end()) weights[static_cast<std::size_t>(it - ranked.begin())] = 0.0;
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
  const std::size_t index = draw(rng);
  return {ranked[index], index + 1, ranked.size()};
}

void AllocationEngine::apply_allocation(const StudentId& student, const NodeId& lecture_id,
                                        const QuestionId& question_id) {
  if (!bank_->contains(question_id)) throw Error(ErrorCode::UnknownQuestion, question_id);
  if (bank_->lecture_of(question_id) != lecture_id) {
    throw Error(ErrorCode::QuestionNotInLecture, question_id + " not in " + lecture_id);
  }
  state_.stats.bump(question_id, StatsEvent::Allocated);
  auto [it, inserted] = state_.students.try_emplace({student, lecture_id});
  if (inserted) {
    it->second.student_id = student;
    it->second.lecture_id = lecture_id;
  }
  it->second.last_served = question_id;
  it->second.pending = question_id;
}

Allocation AllocationEngine::next_question(const StudentId& student, const NodeId& lecture_id,
                                           std::uint64_t seed) {
  auto allocation = choose_question(student, lecture_id, seed);
  apply_allocation(student, lecture_id, allocation.question_id);
  return allocation;
}

void AllocationEngine::check_answerable(const StudentId& student, const NodeId& lecture_id,
                                        const QuestionId& question_id) const {
  if (!bank_->contains(question_id)) throw Error(ErrorCode::UnknownQuestion, question_id);
  if (bank_->lecture_of(question_id) != lecture_id) {
    throw Error(ErrorCode::QuestionNotInLecture, question_id + " not in " + lecture_id);
  }
  auto it = state_.students.find({student, lecture_id});
  if (it == state_.students.end() || it->second.pending != question_id) {
    throw Error(ErrorCode::NoPriorAllocation, question_id + " is not allocated to " + student);
  }
}

bool AllocationEngine::judge_answer(const StudentId& student, const NodeId& lecture_id,
                                    const QuestionId& question_id, std::size_t answer_index) const {
  check_answerable(student, lecture_id, question_id);
  if (answer_index >= bank_->answer_count(question_id)) {
    throw Error(ErrorCode::AnswerIndexOutOfRange, std::to_string(answer_index));
  }
  return answer_index == bank_->correct_index(question_id);
}

AnswerOutcome AllocationEngine::apply_answer(const StudentId& student, const NodeId& lecture_id,
                                             const QuestionId& question_id, bool correct) {
  check_answerable(student, lecture_id, question_id);
  state_.stats.bump(question_id, correct ? StatsEvent::AnsweredCorrect : StatsEvent::AnsweredWrong);
  auto& s = state_.students.at({student, lecture_id});
  s.history.push_back({question_id, correct, points_for(correct), ++state_.clock});
  s.pending.reset();
  return {correct, points_for(correct), grade(s), grade_bucket(s)};
}

AnswerOutcome AllocationEngine::record_answer(const StudentId& student, const NodeId& lecture_id,
                                              const QuestionId& question_id, std::size_t answer_index) {
  const bool correct = judge_answer(student, lecture_id, question_id, answer_index);
  return apply_answer(student, lecture_id, question_id, correct);
}

}  // namespace tutorweb
