#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semcomp::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDegraded = 2 };

/// Runs one invocation (args exclude the program name). Results go to files
/// or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace semcomp::cli
