#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ivr {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitError = 1,
  kExitUsage = 2,
  kExitInvalidProgram = 3,
  kExitNodeLimit = 4,
  kExitTimeBudget = 5,
  kExitConstructionFailed = 6,
  kExitModelError = 7,
};

/// Runs one command line (without the program name). Results go to `out`
/// unless --out is given; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ivr
