#pragma once

#include <string>
#include <vector>

namespace octvf {

/// Runs one pipeline subcommand; returns the process exit code. Errors are
/// printed to stderr and yield a nonzero code instead of escaping.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, const char* const* argv);

}  // namespace octvf
