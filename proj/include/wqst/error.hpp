#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wqst {

enum class ErrorCode {
  FileNotFound,
  MissingColumn,
  EmptyInput,
  ParseError,
  UnknownClimate,
  OutsideRaster,
  InvalidGeometry,
  UnenrichedRecord,
  TooFewRecords,
  DegenerateInput,
  InvalidHyperparameter,
  SingularKernel,
  NoConvergence,
  ColumnMismatch,
  EmptyGrid,
  LengthMismatch,
  ZeroVariance,
  RegimeMismatch,
  EmptyMask,
  UnsupportedModelKind,
  InvalidSpec,
  ConfigError,
  StageInputMissing,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries a category so the CLI can
// report it and tests can assert on it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wqst
