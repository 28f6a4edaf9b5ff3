#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bubbelator {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitNumeric = 1, kExitUsage = 2 };

/// Runs the command-line tool. Results go to `out` unless an output path is
/// given; diagnostics and logs go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the program name omitted from `args`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bubbelator
