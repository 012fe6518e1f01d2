#pragma once

#include <string>
#include <vector>

namespace robust_unmix::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,
  kUsage = 2,
  kDataValidation = 3,
  kNumericalFailure = 4,
};

/// Entry point of the robust_unmix tool. args[0] is the program name.
int run(std::vector<std::string> args);

/// Inserts "--key=value" for every entry of the --config file whose flag is
/// not already given on the command line, and removes the --config flag.
/// Throws std::invalid_argument when the config flag lacks a path.
std::vector<std::string> expand_config(std::vector<std::string> args);

}  // namespace robust_unmix::cli
