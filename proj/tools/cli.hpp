#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace efgp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitViolation = 3;

/// Runs the command line `args` (without the program name).  Artifacts go to the paths
/// named by --out / --svg / --beta / --model, or to `out` when --out is absent.
/// Diagnostics go to `err`.  Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace efgp::cli
