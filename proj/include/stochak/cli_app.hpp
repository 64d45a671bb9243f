#pragma once

#include <string>
#include <vector>

namespace stochak {

// Full command-line entry point (subcommand dispatch, config loading,
// artifact writing). Exit codes: 0 success, 1 check failure, 2 usage or
// config error, 3 assumption failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace stochak
