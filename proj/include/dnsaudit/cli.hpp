#pragma once

#include <iosfwd>

namespace dnsaudit {

/// Exit codes of the command-line interface.
enum ExitCode : int {
  kExitOk = 0,
  kExitTestsFailed = 1,
  kExitUnresolvable = 2,
  kExitPartialAbort = 3,
  kExitUsage = 64,
  kExitDataError = 65,
  kExitNoInput = 66,
};

/// Runs one command line (`argv[0]` is the program name).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dnsaudit
