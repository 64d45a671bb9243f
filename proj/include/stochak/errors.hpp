#pragma once

#include <stdexcept>
#include <string>

namespace stochak {

// Config file could not be parsed/validated; carries a line anchor.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
  ConfigError(const std::string& file, int line, const std::string& msg)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + msg) {}
};

// A standing model assumption failed on the given configuration.
struct AssumptionError : std::runtime_error {
  explicit AssumptionError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stochak
