#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace circbench::cli {

enum ExitCode : int {
  kOk = 0,
  kInfeasible = 1,
  kUsage = 2,
  kInternal = 3,
};

/// Runs one invocation; `args` excludes the program name. Results go to
/// `out` (or the --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace circbench::cli
