#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace taskqr::cli {

enum ExitCode : int { kSuccess = 0, kCorrectnessFailure = 1, kUsageError = 2 };

/// Entry point of the `taskqr` tool. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace taskqr::cli
