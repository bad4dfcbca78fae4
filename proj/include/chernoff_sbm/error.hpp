#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chernoff_sbm {

enum class Errc {
  LengthMismatch,
  OutOfRange,
  AlphaOutOfRange,
  DegeneratePair,
  TooLarge,
  GridTooLarge,
  EvaluationFailure,
  IndistinguishableCommunities,
  ConvergenceFailure,
  DegenerateSplit,
  InvalidInput,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::AlphaOutOfRange: return "AlphaOutOfRange";
    case Errc::DegeneratePair: return "DegeneratePair";
    case Errc::TooLarge: return "TooLarge";
    case Errc::GridTooLarge: return "GridTooLarge";
    case Errc::EvaluationFailure: return "EvaluationFailure";
    case Errc::IndistinguishableCommunities: return "IndistinguishableCommunities";
    case Errc::ConvergenceFailure: return "ConvergenceFailure";
    case Errc::DegenerateSplit: return "DegenerateSplit";
    case Errc::InvalidInput: return "InvalidInput";
  }
  return "Unknown";
}

/// Numerical failures (as opposed to bad input) map to a distinct CLI exit code.
inline bool is_numerical(Errc code) {
  return code == Errc::ConvergenceFailure || code == Errc::EvaluationFailure ||
         code == Errc::DegenerateSplit;
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace chernoff_sbm
