#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace prnufm::cli {

enum ExitCode : int {
  kExitMatched = 0,
  kExitUnmatched = 1,
  kExitError = 2,
};

// Parses `args` (argv without the program name) and runs the selected
// subcommand. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace prnufm::cli
