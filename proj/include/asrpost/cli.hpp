#pragma once

#include <string>
#include <vector>

namespace asrpost {

// Entry point shared by the binary and in-process CLI tests. args excludes
// argv[0]. Exit codes: 0 success, 1 data error, 2 usage error.
int run_cli(const std::vector<std::string>& args);

}  // namespace asrpost
