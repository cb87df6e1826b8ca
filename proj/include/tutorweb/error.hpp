#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tutorweb {

enum class ErrorCode {
  // content
  UnknownParent,
  UnknownNode,
  InvalidKindPairing,
  KindMismatch,
  DuplicateId,
  AttachmentNotOnSlide,
  // item bank
  UnknownLecture,
  UnknownQuestion,
  UnknownTemplate,
  NoCorrectAnswer,
  MultipleCorrectAnswers,
  TooFewAnswers,
  InvalidTemplate,
  ExpressionError,
  AnswerWithoutAllocation,
  // allocation
  EmptyLecture,
  InvalidBucket,
  InvalidItemCount,
  InvalidPolicy,
  QuestionNotInLecture,
  NoPriorAllocation,
  AnswerIndexOutOfRange,
  // anova
  EmptyData,
  DimensionMismatch,
  InvalidModel,
  InvalidDf,
  NotEstimable,
  // trial sim
  TooFewStudents,
  InvalidParams,
  // service
  OrderingViolation,
  StorageFailure,
  CorruptLog,
  ParseError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tutorweb
