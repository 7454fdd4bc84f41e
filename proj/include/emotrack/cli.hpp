#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace emotrack::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitConflict = 3;

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace emotrack::cli
