#pragma once

#include <string>
#include <vector>

namespace taskmap::cli {

// Exit codes: 0 success, 2 usage error, 3 data error, 4 internal error.
int run_cli(const std::vector<std::string>& args);

} // namespace taskmap::cli
