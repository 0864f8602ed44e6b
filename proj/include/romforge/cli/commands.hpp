// Copyright The romforge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ROMFORGE_CLI_COMMANDS_HPP
#define ROMFORGE_CLI_COMMANDS_HPP

#include <ostream>
#include <string>
#include <vector>

namespace romforge::cli
{

/// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
enum ExitCode
{
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNumerical = 3
};

/// Runs one command line (args[0] is the program name). Progress goes to
/// `log`, results and errors to `out` and `log` respectively.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &log);

}  // namespace romforge::cli

#endif  // ROMFORGE_CLI_COMMANDS_HPP
