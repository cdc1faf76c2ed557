#include "wavectl/error.hpp"

namespace wavectl {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::X0InsideDomain: return "X0InsideDomain";
    case ErrorCode::TimeTooShort: return "TimeTooShort";
    case ErrorCode::BadDelta: return "BadDelta";
    case ErrorCode::PsiNonPositive: return "PsiNonPositive";
    case ErrorCode::GridTooCoarse: return "GridTooCoarse";
    case ErrorCode::UnknownNorm: return "UnknownNorm";
    case ErrorCode::NonSquareSliceMismatch: return "NonSquareSliceMismatch";
    case ErrorCode::OverflowRisk: return "OverflowRisk";
    case ErrorCode::SolverStagnation: return "SolverStagnation";
    case ErrorCode::SingularKKT: return "SingularKKT";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::CFLViolation: return "CFLViolation";
    case ErrorCode::NonFiniteState: return "NonFiniteState";
    case ErrorCode::GrowthViolated: return "GrowthViolated";
    case ErrorCode::NoContraction: return "NoContraction";
    case ErrorCode::ClassEscape: return "ClassEscape";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace wavectl
