#pragma once

#include <stdexcept>
#include <string>

namespace fairtree {

// Bad configuration supplied by the user (missing columns, invalid
// parameters). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or degenerate input data. Maps to CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fairtree
