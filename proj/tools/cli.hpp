#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spforest::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Runs the command line `args` (without the program name). Normal output goes
/// to `out`; diagnostics go to `err` prefixed with "ERROR:".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spforest::cli
