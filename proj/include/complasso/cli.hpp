#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace complasso::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

// Runs `complasso <command> [flags]`; args excludes the program name.
// Messages go to `err`, progress to `log`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& log, std::ostream& err);

}  // namespace complasso::cli
