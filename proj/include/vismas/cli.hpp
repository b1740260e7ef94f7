#pragma once

#include <iosfwd>

namespace vismas {

// Process exit codes.
inline constexpr int exit_converged = 0;
inline constexpr int exit_runtime_error = 1;
inline constexpr int exit_stalled = 2;
inline constexpr int exit_max_ticks = 3;
inline constexpr int exit_diverged = 4;
inline constexpr int exit_usage = 64;
inline constexpr int exit_data = 65;

/// Entry point of the `vismas` tool.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vismas
