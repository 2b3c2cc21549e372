// cli.hpp: command-line front end.
//
//   hybridoem <steady|spectrum|power-sweep|delay|classify> --config PATH
//             [--out PATH] [--format csv|json] [--convention standard|paper-literal] [--quiet]
//
// Exit codes: 0 success, 1 parse/validation error, 2 solver error, 3 I/O error.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hoem {

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitSolver = 2, kExitIo = 3 };

int run_command(int argc, const char* const* argv);

/// `args` excludes the program name. Results go to `out` when no output path
/// is configured; diagnostics go to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hoem
