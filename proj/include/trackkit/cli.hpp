#pragma once

#include <ostream>

namespace trackkit {

/// Exit statuses of the command-line tool.
enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitMalformedInput = 2,
  kExitConfigViolation = 3,
  kExitUnknownSequence = 4,
};

/// Entry point of `trackkit`; reusable in-process for tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trackkit
