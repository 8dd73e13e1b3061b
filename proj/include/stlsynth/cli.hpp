#pragma once

#include <iosfwd>

namespace stlsynth {

/// Exit codes of the command line tool.
enum ExitCode { ExitSatisfied = 0, ExitUnsatisfiable = 1, ExitInfeasible = 2, ExitUsage = 3, ExitBackend = 4 };

/// Subcommands synthesize, check and simulate.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stlsynth
