#pragma once

#include <string>
#include <vector>

namespace fqkit::cli {

// Parses argv (without the program name) and runs the selected subcommand.
// Returns the process exit code: 0 success, 1 runtime failure, 2 usage.
int run(const std::vector<std::string>& args);

}  // namespace fqkit::cli
