#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace koopman {

enum ExitCode : int { exit_ok = 0, exit_usage = 2, exit_data = 3, exit_numerical = 4 };

/// Runs the command line tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace koopman
