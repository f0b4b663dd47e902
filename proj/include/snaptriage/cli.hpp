#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace snaptriage::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitGate = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point for the snaptriage executable.
int run(int argc, char** argv);

/// Same as above with explicit streams; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace snaptriage::cli
