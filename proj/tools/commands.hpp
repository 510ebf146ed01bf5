#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace srcl::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kSolverFailure = 2;

/// Runs `srcl <args...>` (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace srcl::cli
