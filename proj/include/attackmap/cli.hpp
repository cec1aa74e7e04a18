#pragma once

#include <ostream>
#include <span>
#include <string>

namespace attackmap::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;  // bad flags, unknown names, missing input paths

/// Runs the `attackmap` command line. `args` excludes the program name.
/// Data goes to `out`, diagnostics to `err`; returns the exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace attackmap::cli
