#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace angleqa {

enum class Errc {
  DuplicateSlot,
  InvalidName,
  UnknownSlot,
  UnknownAbbrev,
  OverlappingSlots,
  EmptyTargets,
  InvalidAngle,
  DuplicateInstanceId,
  InvalidInstance,
  MarkerCollision,
  EmptyValue,
  MissingSourceSlot,
  MissingTargetSlot,
  NoApplicableAngle,
  InvalidConfig,
  EmptyGolds,
  MalformedOptions,
  MetricUnavailable,
  BackendUnavailable,
  EmptyModel,
  ConflictingPairs,
  InvalidDecodeOptions,
  ParseError,
  BadAnswerKey,
  NoGoldAnswers,
  EmptyCorpus,
  KTooSmall,
  EmptyExplanation,
  DuplicateCandidates,
  EmptyCandidates,
  InvalidScore,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace angleqa
