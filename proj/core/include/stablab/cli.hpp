#pragma once

#include <iosfwd>

namespace stablab {

/// Exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitAuditViolation = 1,
  kExitValidation = 2,
  kExitSolver = 3,
};

/// Entry point of the `stablab` tool:
///   stablab solve|price|sweep-delta|sweep-p --config <path> [--out <dir>]
///           [--seed <u64>] [--tol <float>] [--at <value>]
///   stablab audit [--seed <u64>] [--trials <n>] [--config <path>] [--out <dir>]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stablab
