#pragma once

#include <iosfwd>

namespace tcgreen::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCriteriaFailed = 1;  // verify ran but some criterion failed
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitInternal = 70;
inline constexpr int kExitIo = 74;

/// Parses the command line, runs one subcommand and returns the exit status.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace tcgreen::cli
