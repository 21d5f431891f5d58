#include "perslab/error.hpp"

namespace perslab {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonCentered: return "NonCentered";
    case ErrorCode::MassDeficit: return "MassDeficit";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::NotLattice: return "NotLattice";
    case ErrorCode::NotRational: return "NotRational";
    case ErrorCode::VarianceUndefined: return "VarianceUndefined";
    case ErrorCode::StateBudgetExceeded: return "StateBudgetExceeded";
    case ErrorCode::NotInBridgeSet: return "NotInBridgeSet";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::ExponentMismatch: return "ExponentMismatch";
    case ErrorCode::NoReferenceLaw: return "NoReferenceLaw";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
  }
  return "Unknown";
}

}  // namespace perslab
