#pragma once

#include <exception>
#include <string>
#include <vector>

namespace par::cli {

/// Parses arguments, runs one subcommand and returns the process exit status.
/// Failures print `error: <module>: <message>` on stderr and return 1.
int run(const std::vector<std::string>& args);

/// Module name reported for an exception escaping a command.
std::string module_of(const std::exception& e);

}  // namespace par::cli
