// Command-line front end: train, parse, eval, coverage, oracle, simulate, vocab.
//
// Exit status: 0 success, 1 data or model error, 2 usage error. Data goes to
// out (or --output), diagnostics to err.

#ifndef MH4_CLI_HPP_
#define MH4_CLI_HPP_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace mh4 {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Reads "key = value" lines; '#' starts a comment. Throws std::runtime_error
/// on a line without '='.
std::map<std::string, std::string> read_config_file(const std::string& path);

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mh4

#endif  // MH4_CLI_HPP_
