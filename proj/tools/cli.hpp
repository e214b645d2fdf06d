#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plasmasym::cli {

/// Exit codes of the command-line tool.
enum Exit : int {
  ok = 0,
  internal_error = 1,
  validation_error = 2,
  verification_failure = 3,
};

/// Runs one command. `args` excludes the program name. Every run that gets
/// past flag parsing writes `<out>/report.json`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace plasmasym::cli
