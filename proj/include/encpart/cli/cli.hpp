#pragma once

#include <iosfwd>

namespace encpart::cli {

// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kIoError = 1,       // unreadable input, bad plan files
  kInvalidInput = 2,  // parse errors, validation violations, bad flags
  kProgramError = 3,  // the DSL program failed at run time
  kMismatch = 4,      // compare found a divergence
};

// Entry point of the `encpart` tool. Data goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace encpart::cli
