#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xwalk {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitIo = 2,
  kExitColdStart = 3,
};

/// Entry point of the `xwalk` command line tool. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace xwalk
