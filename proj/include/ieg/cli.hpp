#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace ieg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

// Runs the command line `args` (without the program name) and returns the
// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace ieg::cli
