#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mjls {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,          ///< success, or a stabilizing policy found and verified
  kExitNotFound = 1,    ///< no stabilizing policy found / policy not stable
  kExitInvalid = 2,     ///< invalid input
  kExitNumerical = 3,   ///< solver or numerical failure
};

/// args[0] is the program name. Diagnostics go to `err`, reports to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace mjls
