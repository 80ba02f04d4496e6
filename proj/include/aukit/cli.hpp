#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aukit {

enum ExitStatus : int { exit_ok = 0, exit_data_error = 1, exit_usage_error = 2 };

/// Runs one subcommand. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aukit
