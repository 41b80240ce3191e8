#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace patpoisson {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCertificationFailure = 1;
inline constexpr int kExitInvalidInput = 2;
inline constexpr int kExitResourceLimit = 3;

// Runs the command line `args` (without the program name). Output goes to
// `out` unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace patpoisson
