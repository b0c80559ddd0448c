#pragma once

#include <iosfwd>

namespace mfp {

/// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitPlannerFailure = 1;
inline constexpr int kExitUsage = 2;

/// Subcommands: plan, simulate, theory, bench, batch. Output goes to `out`
/// and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace mfp
