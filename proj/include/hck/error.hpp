#pragma once

#include <stdexcept>
#include <string>

namespace hck {

enum class ErrorKind {
  kUsage,            // bad configuration or arguments
  kData,             // malformed or unusable input data
  kIdentification,   // target parameter not identified (X collinear with W, no dof)
  kInfeasible,       // HCK infeasible: max leverage condition violated
  kUnitLeverage,     // HC2-HC4 weight undefined at an observation with M_ii = 0
  kNegativeVariance, // non-positive variance estimate for the requested coordinate
  kNumerical,        // factorization or solve failed numerically
  kTooLarge,         // dense n x n allocation exceeds the memory cap
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Process exit code for an error surfaced by the CLI.
int exit_code_for(ErrorKind kind);

}  // namespace hck
