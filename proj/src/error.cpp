#include "wqst/error.hpp"

namespace wqst {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::FileNotFound: return "FileNotFound";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownClimate: return "UnknownClimate";
    case ErrorCode::OutsideRaster: return "OutsideRaster";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::UnenrichedRecord: return "UnenrichedRecord";
    case ErrorCode::TooFewRecords: return "TooFewRecords";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InvalidHyperparameter: return "InvalidHyperparameter";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ColumnMismatch: return "ColumnMismatch";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::RegimeMismatch: return "RegimeMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::UnsupportedModelKind: return "UnsupportedModelKind";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::StageInputMissing: return "StageInputMissing";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

}  // namespace wqst
