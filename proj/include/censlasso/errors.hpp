#pragma once

#include <stdexcept>
#include <string>

namespace censlasso {

enum class ErrorCode {
  Io,
  MissingColumn,
  NonBinaryDelta,
  NonPositiveTime,
  RaggedRow,
  InvalidSpec,
  InvalidK,
  DimensionMismatch,
  DegenerateWeights,
  DegenerateSample,
  NoConvergence,
  ZeroNormalizer,
  EmptyActiveSet,
  FullActiveSet,
  TooFewSamples,
};

// Coarse grouping used by the command line for exit codes.
enum class ErrorCategory { Parse, Solver, Config };

const char* to_string(ErrorCode code);
ErrorCategory category(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace censlasso
