#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace canids {

/// Every failure the toolkit reports. Grouped by the module that raises it.
enum class Errc {
  // canbus
  MalformedFrame,
  CrcMismatch,
  EmptySchedule,
  InvalidProfile,
  WindowOutOfRange,
  EmptySpoofTargets,
  InvalidAttackSpec,
  // ingest
  UnreadableStream,
  EmptyInput,
  InvalidHexDigit,
  TooFewValues,
  InvalidArgument,
  AllRowsMissing,
  LengthMismatch,
  ZeroVariance,
  EmptyColumn,
  UnnormalizedInput,
  CorruptDataset,
  // nncore
  ShapeMismatch,
  InvalidOneHot,
  NonFiniteGradient,
  // plenet
  EmptyPartition,
  NonFiniteLoss,
  DimensionMismatch,
  EmptyDomain,
  // baselines
  EmptyTrainingSet,
  KTooLarge,
  // metrics / checkpoint
  InvalidLabel,
  EmptyMatrix,
  SingleClassInput,
  CorruptCheckpoint,
  VersionMismatch,
  IoFailure,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace canids
