#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mocp {

/// Exit codes: 0 success, 1 a checked condition failed, 2 bad input.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitInput = 2;

/// Runs one subcommand (check, solve, front, certify, cq, transform).
/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mocp
