#pragma once

#include <string>
#include <vector>

namespace spoofvqa {

// Entry point behind the spoofvqa binary; takes argv-style arguments
// (without the program name handled separately by CLI11). Returns the
// process exit code; failures print a single diagnostic line to stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace spoofvqa
