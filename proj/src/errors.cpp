#include "angleqa/errors.hpp"

namespace angleqa {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::DuplicateSlot: return "DuplicateSlot";
    case Errc::InvalidName: return "InvalidName";
    case Errc::UnknownSlot: return "UnknownSlot";
    case Errc::UnknownAbbrev: return "UnknownAbbrev";
    case Errc::OverlappingSlots: return "OverlappingSlots";
    case Errc::EmptyTargets: return "EmptyTargets";
    case Errc::InvalidAngle: return "InvalidAngle";
    case Errc::DuplicateInstanceId: return "DuplicateInstanceId";
    case Errc::InvalidInstance: return "InvalidInstance";
    case Errc::MarkerCollision: return "MarkerCollision";
    case Errc::EmptyValue: return "EmptyValue";
    case Errc::MissingSourceSlot: return "MissingSourceSlot";
    case Errc::MissingTargetSlot: return "MissingTargetSlot";
    case Errc::NoApplicableAngle: return "NoApplicableAngle";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::EmptyGolds: return "EmptyGolds";
    case Errc::MalformedOptions: return "MalformedOptions";
    case Errc::MetricUnavailable: return "MetricUnavailable";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::EmptyModel: return "EmptyModel";
    case Errc::ConflictingPairs: return "ConflictingPairs";
    case Errc::InvalidDecodeOptions: return "InvalidDecodeOptions";
    case Errc::ParseError: return "ParseError";
    case Errc::BadAnswerKey: return "BadAnswerKey";
    case Errc::NoGoldAnswers: return "NoGoldAnswers";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::KTooSmall: return "KTooSmall";
    case Errc::EmptyExplanation: return "EmptyExplanation";
    case Errc::DuplicateCandidates: return "DuplicateCandidates";
    case Errc::EmptyCandidates: return "EmptyCandidates";
    case Errc::InvalidScore: return "InvalidScore";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace angleqa
