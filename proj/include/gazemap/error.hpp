#pragma once

#include <stdexcept>
#include <string>

namespace gazemap {

// Base for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files or documents (CLI exit 2).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Bad configuration values or unknown config keys (CLI exit 3).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition (index out of range, point out of bounds).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Internal consistency check failed (CLI exit 4).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace gazemap
