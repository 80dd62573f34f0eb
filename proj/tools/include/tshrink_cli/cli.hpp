#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tshrink::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kNumericError = 3,
  kConfigError = 4,
};

/// Runs one command line (argv[0] is the program name). Reports go to the
/// --output path when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tshrink::cli
