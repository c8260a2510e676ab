#pragma once

// Command line front end.  Exit codes:
//   0  the requested check passed / the computation finished affirmatively
//   1  usage error, malformed input, or an internal failure
//   2  the computation finished but the verdict is negative
//      (not definite, sign mismatch, flow did not converge, audit failed)

namespace defconn {
namespace cli {

constexpr int kExitPass = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;

int run(int argc, const char* const* argv);

} // namespace cli
} // namespace defconn
