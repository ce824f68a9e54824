#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace varlpec {

enum class ErrorCode {
  kInvalidArgument,
  kBadProbabilities,
  kBadDimensions,
  kBadBeta,
  kUnboundedPolytope,
  kEmptyPolytope,
  kParseError,
  kInvalidModel,
  kNumericalFailure,
  kMissingAbsBound,
  kAmbiguousClassification,
  kNotComplementary,
  kTooLarge,
  kDegenerateCurvature,
  kIoError,
};

std::string_view error_code_name(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (and the CLI exit-code mapping) can dispatch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace varlpec
