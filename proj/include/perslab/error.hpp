#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace perslab {

// Machine-readable failure reasons. The CLI prints the name and maps the
// category onto its exit code.
enum class ErrorCode {
  NonCentered,
  MassDeficit,
  NegativeProbability,
  InvalidParameter,
  NotLattice,
  NotRational,
  VarianceUndefined,
  StateBudgetExceeded,
  NotInBridgeSet,
  TooLarge,
  DegenerateGrid,
  ExponentMismatch,
  NoReferenceLaw,
  ConfigError,
  AssertionFailed,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace perslab
