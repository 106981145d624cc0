#include "amf/error.hpp"

namespace amf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kMalformedCsv: return "MalformedCsv";
    case ErrorCode::kDuplicateCell: return "DuplicateCell";
    case ErrorCode::kEmptyPanel: return "EmptyPanel";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonPositivePrice: return "NonPositivePrice";
    case ErrorCode::kInvalidSpec: return "InvalidSpec";
    case ErrorCode::kMissingMarketIndex: return "MissingMarketIndex";
    case ErrorCode::kUnclassifiedEntity: return "UnclassifiedEntity";
    case ErrorCode::kUniverseTooSmall: return "UniverseTooSmall";
    case ErrorCode::kInsufficientOverlap: return "InsufficientOverlap";
    case ErrorCode::kEmptyCluster: return "EmptyCluster";
    case ErrorCode::kInvalidPValue: return "InvalidPValue";
    case ErrorCode::kTotalLoss: return "TotalLoss";
    case ErrorCode::kEmptyLeg: return "EmptyLeg";
    case ErrorCode::kRankDeficient: return "RankDeficient";
    case ErrorCode::kTooFewObservations: return "TooFewObservations";
    case ErrorCode::kZeroDirection: return "ZeroDirection";
    case ErrorCode::kNotNested: return "NotNested";
    case ErrorCode::kZeroResidual: return "ZeroResidual";
    case ErrorCode::kZeroBaselineSse: return "ZeroBaselineSSE";
    case ErrorCode::kDidNotConverge: return "DidNotConverge";
    case ErrorCode::kZeroVariance: return "ZeroVariance";
    case ErrorCode::kDegenerateAfterSelection: return "DegenerateAfterSelection";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kConfig:
      return ErrorCategory::kConfig;
    case ErrorCode::kRankDeficient:
    case ErrorCode::kTooFewObservations:
    case ErrorCode::kZeroDirection:
    case ErrorCode::kNotNested:
    case ErrorCode::kZeroResidual:
    case ErrorCode::kZeroBaselineSse:
    case ErrorCode::kDidNotConverge:
    case ErrorCode::kZeroVariance:
    case ErrorCode::kDegenerateAfterSelection:
      return ErrorCategory::kNumerical;
    default:
      return ErrorCategory::kData;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace amf
