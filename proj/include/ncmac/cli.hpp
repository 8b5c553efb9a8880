#pragma once

#include <string>
#include <vector>

namespace ncmac::cli {

// Executes one command-line invocation (argv without the program name) and
// returns the process exit code: 0 success, 2 usage or configuration error,
// 3 numerical failure.  All output goes to stdout/stderr.
int run(const std::vector<std::string>& args);

std::string usage();

}  // namespace ncmac::cli
