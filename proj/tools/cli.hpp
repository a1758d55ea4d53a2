#pragma once

#include <string>
#include <vector>

namespace commcost::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitNetwork = 4;

inline constexpr const char* kToolVersion = "0.3.0";

/// Runs the command line `args` (args[0] is the program name) and returns the exit code.
int run(const std::vector<std::string>& args);

}  // namespace commcost::cli
