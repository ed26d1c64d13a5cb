#pragma once

// Command-line front end: `simulate`, `fit threshold|squeezing|trace`,
// `optimize`, `plot`.

#include <iosfwd>

namespace opo::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kInputSchema = 2,
  kAnalysisDegenerate = 3,
  kInfeasible = 4,
  kNonConvergence = 5,
};

/// Runs one CLI invocation. Results go to files under --out; the key = value
/// report of `fit` and `optimize` is echoed to `out`; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace opo::cli
