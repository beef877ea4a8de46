#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fsq::cli {

enum ExitCode : int { success = 0, runtime_failure = 1, usage_error = 2 };

/// Runs the command line with `args` (program name excluded). Primary
/// output goes to `out` unless redirected to files; diagnostics and error
/// JSON go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsq::cli
