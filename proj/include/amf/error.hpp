#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amf {

enum class ErrorCode {
  kInvalidArgument,
  kConfig,
  kIo,
  // data
  kMalformedCsv,
  kDuplicateCell,
  kEmptyPanel,
  kLengthMismatch,
  kNonPositivePrice,
  kInvalidSpec,
  kMissingMarketIndex,
  kUnclassifiedEntity,
  kUniverseTooSmall,
  kInsufficientOverlap,
  kEmptyCluster,
  kInvalidPValue,
  kTotalLoss,
  kEmptyLeg,
  // numerical
  kRankDeficient,
  kTooFewObservations,
  kZeroDirection,
  kNotNested,
  kZeroResidual,
  kZeroBaselineSse,
  kDidNotConverge,
  kZeroVariance,
  kDegenerateAfterSelection,
};

/// Coarse grouping used by the command-line front end to pick exit codes.
enum class ErrorCategory { kConfig, kData, kNumerical };

std::string_view to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace amf
