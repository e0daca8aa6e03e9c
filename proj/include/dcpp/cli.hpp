#pragma once

#include <string>
#include <vector>

namespace dcpp::cli {

// Entry point shared by the binary and the tests.  args excludes the program
// name.  Returns 0 on success, 1 on invalid input or I/O failure, 2 when a
// verification verdict fails.
int run(const std::vector<std::string>& args);

}  // namespace dcpp::cli
