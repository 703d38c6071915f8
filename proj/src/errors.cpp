#include "censlasso/errors.hpp"

#include "censlasso/types.hpp"

namespace censlasso {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::NonBinaryDelta: return "NonBinaryDelta";
    case ErrorCode::NonPositiveTime: return "NonPositiveTime";
    case ErrorCode::RaggedRow: return "RaggedRow";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidK: return "InvalidK";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DegenerateWeights: return "DegenerateWeights";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ZeroNormalizer: return "ZeroNormalizer";
    case ErrorCode::EmptyActiveSet: return "EmptyActiveSet";
    case ErrorCode::FullActiveSet: return "FullActiveSet";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
  }
  return "Unknown";
}

ErrorCategory category(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io:
    case ErrorCode::MissingColumn:
    case ErrorCode::NonBinaryDelta:
    case ErrorCode::NonPositiveTime:
    case ErrorCode::RaggedRow:
      return ErrorCategory::Parse;
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidK:
      return ErrorCategory::Config;
    default:
      return ErrorCategory::Solver;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

IndexSet nonzero_support(const Vector& v) {
  IndexSet out;
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    if (v[j] != 0.0) out.push_back(static_cast<int>(j));
  }
  return out;
}

}  // namespace censlasso
