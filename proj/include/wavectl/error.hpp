#pragma once

#include <stdexcept>
#include <string>

namespace wavectl {

enum class ErrorCode {
  X0InsideDomain,
  TimeTooShort,
  BadDelta,
  PsiNonPositive,
  GridTooCoarse,
  UnknownNorm,
  NonSquareSliceMismatch,
  OverflowRisk,
  SolverStagnation,
  SingularKKT,
  DivisionByZero,
  CFLViolation,
  NonFiniteState,
  GrowthViolated,
  NoContraction,
  ClassEscape,
  ParseError,
  UnknownKey,
  InvalidValue,
  IoError,
};

const char* to_string(ErrorCode code);

/// Exception carrying a machine-readable code; what() is the human message.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wavectl
