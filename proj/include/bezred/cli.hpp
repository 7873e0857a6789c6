#pragma once

#include <ostream>

namespace bezred::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 2,
  kIoError = 3,
  kNumericalFailure = 4,
};

/// Entry point of the `bezred` tool: `reduce` and `verify` subcommands.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bezred::cli
