#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bmips::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Runs the command line (args[0] is the program name) and returns the exit
/// code. Normal output goes to `out`, diagnostics and warnings to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bmips::cli
