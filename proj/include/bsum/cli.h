// The bsum command-line front end, as a library function so tests can run
// commands in-process.
//
// Subcommands: sum; sens bound | bruteforce | recommend; attack gen |
// verify; experiment run; dpcheck exact. Reports are JSON with a
// "schema": 1 field and a run manifest. They carry no timestamps, so equal
// inputs and seeds give byte-identical output.

#ifndef BSUM_CLI_H_
#define BSUM_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace bsum {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
// Precondition violations, unsupported combinations and malformed input.
inline constexpr int kExitPrecondition = 2;
// A computed result contradicts what it was supposed to show.
inline constexpr int kExitVerification = 3;

inline constexpr const char* kToolVersion = "1.0.0";

// Runs one command. argv[0] is the program name. Reports go to `out`, or
// to files under --out when given; diagnostics go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace bsum

#endif  // BSUM_CLI_H_
