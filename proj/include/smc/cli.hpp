#pragma once

#include <iosfwd>

namespace smc::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kDataError = 3,
  kNumericError = 4,
};

// Entry point for `smc <simulate|cluster|epochs|compare|gcv> ...`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smc::cli
