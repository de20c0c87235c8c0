#ifndef PLANECLUST_COMMANDS_HPP
#define PLANECLUST_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace planeclust {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitRuntime = 1, kExitConfig = 2 };

/// Runs one command line (without the program name), e.g.
/// {"cluster", "--data", "iris.csv", "--k", "3"}.
///
/// A `--config FILE` of key=value lines contributes flags for every key not
/// also given on the command line.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace planeclust

#endif  // PLANECLUST_COMMANDS_HPP
