#pragma once

#include <string>
#include <vector>

namespace magshape::cli {

// Full command-line front end. Returns the process exit code:
//   0 success, 2 usage error, 3 data error, 4 numeric failure.
// Tests drive it in-process; tools/main.cpp forwards argv.
int run(const std::vector<std::string>& args);

}  // namespace magshape::cli
