#pragma once

#include <stdexcept>
#include <string>

namespace lbvs {

enum class ErrorCode {
  kInvalidInput,
  kPointAtHorizon,
  kEmptyDataset,
  kTrainingDiverged,
  kCorruptModel,
  kDegenerateGeometry,
  kEmptyTrajectory,
  kUndefinedLag,
  kNoOverlap,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code);

/// Single exception type for the library; the code tells callers how to react.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lbvs
