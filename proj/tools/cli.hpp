#pragma once

#include <string>
#include <vector>

namespace chartfolio::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitInternal = 2;
inline constexpr int kExitUsage = 64;

/// Runs one subcommand. args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace chartfolio::cli
