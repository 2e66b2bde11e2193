#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ixt {

/// Exit codes of the `advisor` tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitInfeasible = 2;

/// Runs the `advisor` command line.  `args` excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int run_cli(int argc, char **argv);

}
