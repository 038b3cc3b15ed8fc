#include "hck/error.hpp"

namespace hck {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kData: return "data";
    case ErrorKind::kIdentification: return "identification";
    case ErrorKind::kInfeasible: return "infeasible";
    case ErrorKind::kUnitLeverage: return "unit_leverage";
    case ErrorKind::kNegativeVariance: return "negative_variance";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kTooLarge: return "too_large";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return 2;
    case ErrorKind::kData:
    case ErrorKind::kIdentification:
    case ErrorKind::kTooLarge: return 3;
    default: return 4;
  }
}

}  // namespace hck
