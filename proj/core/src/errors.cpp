#include "varlpec/errors.hpp"

namespace varlpec {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kBadProbabilities: return "BadProbabilities";
    case ErrorCode::kBadDimensions: return "BadDimensions";
    case ErrorCode::kBadBeta: return "BadBeta";
    case ErrorCode::kUnboundedPolytope: return "UnboundedPolytope";
    case ErrorCode::kEmptyPolytope: return "EmptyPolytope";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kMissingAbsBound: return "MissingAbsBound";
    case ErrorCode::kAmbiguousClassification: return "AmbiguousClassification";
    case ErrorCode::kNotComplementary: return "NotComplementary";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kDegenerateCurvature: return "DegenerateCurvature";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
      code_(code) {}

}  // namespace varlpec
