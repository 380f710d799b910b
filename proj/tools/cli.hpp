#pragma once

#include <iosfwd>

namespace ecodrive::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  // validate: gap above 5%
  kInputError = 2,
  kNoAdvice = 3,
  kBudgetExceeded = 4,
};

/// Entry point of the `ecodrive` command; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ecodrive::cli
