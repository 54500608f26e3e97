// Command-line front end. The tool binary is a thin wrapper around run_cli so
// tests can drive it in-process.
//
// Exit codes: 0 ok, 1 verification failed, 2 malformed flags/files/data,
// 3 model assumption violated, 4 internal error.

#ifndef MCSELL_CLI_HPP
#define MCSELL_CLI_HPP

#include <iosfwd>

namespace mcsell {

inline constexpr int kExitOk = 0;
inline constexpr int kExitVerifyFailed = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitAssumption = 3;
inline constexpr int kExitInternal = 4;

// stdin is read when a file argument is "-".
int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace mcsell

#endif  // MCSELL_CLI_HPP
