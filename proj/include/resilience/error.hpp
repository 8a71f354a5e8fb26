#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace resilience {

enum class ErrorCode {
  // ingestion
  MalformedRow,
  DuplicateCell,
  UnknownRatioCode,
  OutOfRange,
  EmptyPeriod,
  // linear algebra / screening
  DegenerateColumn,
  TooFewRows,
  NothingSurvives,
  MissingCategory,
  UnknownRatio,
  // functional PCA
  TooFewFirms,
  GridMismatch,
  FirmSetMismatch,
  // valuation
  NoUsableYears,
  EmptySector,
  NoRoot,
  // diagnostics
  ZeroBase,
  MissingForecast,
  MissingBaseline,
  ZeroBaseline,
  TooFewObservations,
  // oracles
  NotPsd,
  NotSymmetric,
  // plumbing
  IoFailure,
  InvalidArgument,
  ConfigInvalid,
  ArtifactMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace resilience
