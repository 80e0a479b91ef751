#include "canids/error.hpp"

namespace canids {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::MalformedFrame: return "MalformedFrame";
    case Errc::CrcMismatch: return "CrcMismatch";
    case Errc::EmptySchedule: return "EmptySchedule";
    case Errc::InvalidProfile: return "InvalidProfile";
    case Errc::WindowOutOfRange: return "WindowOutOfRange";
    case Errc::EmptySpoofTargets: return "EmptySpoofTargets";
    case Errc::InvalidAttackSpec: return "InvalidAttackSpec";
    case Errc::UnreadableStream: return "UnreadableStream";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidHexDigit: return "InvalidHexDigit";
    case Errc::TooFewValues: return "TooFewValues";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::AllRowsMissing: return "AllRowsMissing";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::EmptyColumn: return "EmptyColumn";
    case Errc::UnnormalizedInput: return "UnnormalizedInput";
    case Errc::CorruptDataset: return "CorruptDataset";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::InvalidOneHot: return "InvalidOneHot";
    case Errc::NonFiniteGradient: return "NonFiniteGradient";
    case Errc::EmptyPartition: return "EmptyPartition";
    case Errc::NonFiniteLoss: return "NonFiniteLoss";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::EmptyDomain: return "EmptyDomain";
    case Errc::EmptyTrainingSet: return "EmptyTrainingSet";
    case Errc::KTooLarge: return "KTooLarge";
    case Errc::InvalidLabel: return "InvalidLabel";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::SingleClassInput: return "SingleClassInput";
    case Errc::CorruptCheckpoint: return "CorruptCheckpoint";
    case Errc::VersionMismatch: return "VersionMismatch";
    case Errc::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

}  // namespace canids
