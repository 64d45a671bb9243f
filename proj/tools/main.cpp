#include <vector>

#include "stochak/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return stochak::run_cli(args);
}
