#pragma once

/**
 * @file cli.hpp
 * @brief The hopfchain command line, callable in-process.
 *
 * Exit codes: 0 success, 1 a requested check failed, 2 bad usage or a
 * violated precondition, 3 an I/O failure.
 */

#include <iosfwd>
#include <string>
#include <vector>

namespace hopfchain::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kIo = 3 };

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads `key = value` lines ('#' starts a comment) and turns them into
/// flags: `q = 2/1` becomes `--q 2/1`, `crosscheck = true` becomes
/// `--crosscheck`, and `false` drops the flag. The key `command` gives the
/// subcommand path when the command line has none.
struct ConfigFile {
  std::vector<std::string> command;
  std::vector<std::string> flags;
};

ConfigFile read_config(const std::string& path);

}  // namespace hopfchain::cli
