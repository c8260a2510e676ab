#pragma once

#include <stdexcept>
#include <string>

namespace defconn {

// Machine-checkable failure categories. The CLI maps BadInput and friends to
// exit code 1; verdict-style negatives (not definite, criterion fails) are not
// errors and are reported through return values / exit code 2 instead.
enum class ErrorCode {
  BadInput,              // malformed or schema-violating caller data
  NotSymmetricPositive,  // a matrix required to be SPD is not
  NotDefinite,           // curvature triple fails the definiteness precondition
  SignMismatch,          // caller Lambda sign disagrees with the connection sign
  DegenerateBranch,      // square-root branch requested across an eigenvalue tie
  ReconstructionFailure, // metric reconstruction produced no definite candidate
  ToleranceFailure,      // a postcondition residual exceeded its tolerance
  GridError,             // grid too coarse, non-uniform, or boundary data missing
  DefinitenessLost       // a flow step would leave the definite locus
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

} // namespace defconn
