#include "tutorweb/error.hpp"

namespace tutorweb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownParent: return "UnknownParent";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::InvalidKindPairing: return "InvalidKindPairing";
    case ErrorCode::KindMismatch: return "KindMismatch";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::AttachmentNotOnSlide: return "AttachmentNotOnSlide";
    case ErrorCode::UnknownLecture: return "UnknownLecture";
    case ErrorCode::UnknownQuestion: return "UnknownQuestion";
    case ErrorCode::UnknownTemplate: return "UnknownTemplate";
    case ErrorCode::NoCorrectAnswer: return "NoCorrectAnswer";
    case ErrorCode::MultipleCorrectAnswers: return "MultipleCorrectAnswers";
    case ErrorCode::TooFewAnswers: return "TooFewAnswers";
    case ErrorCode::InvalidTemplate: return "InvalidTemplate";
    case ErrorCode::ExpressionError: return "ExpressionError";
    case ErrorCode::AnswerWithoutAllocation: return "AnswerWithoutAllocation";
    case ErrorCode::EmptyLecture: return "EmptyLecture";
    case ErrorCode::InvalidBucket: return "InvalidBucket";
    case ErrorCode::InvalidItemCount: return "InvalidItemCount";
    case ErrorCode::InvalidPolicy: return "InvalidPolicy";
    case ErrorCode::QuestionNotInLecture: return "QuestionNotInLecture";
    case ErrorCode::NoPriorAllocation: return "NoPriorAllocation";
    case ErrorCode::AnswerIndexOutOfRange: return "AnswerIndexOutOfRange";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::InvalidDf: return "InvalidDf";
    case ErrorCode::NotEstimable: return "NotEstimable";
    case ErrorCode::TooFewStudents: return "TooFewStudents";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace tutorweb
