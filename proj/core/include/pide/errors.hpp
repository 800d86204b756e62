#pragma once

#include <stdexcept>
#include <string>

namespace pide {

/// Malformed user configuration (symbol, keyword, antiquotation or field tables).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure of the surrounding environment: missing executables, timeouts, I/O.
class EnvironmentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pide
