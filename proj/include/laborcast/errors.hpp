#pragma once

#include <stdexcept>
#include <string>

namespace laborcast {

// Malformed or inconsistent input data (bad file, bad header, bad value).
// Maps to exit code 2 in the CLI.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure during fitting (divergence, non-finite loss).
// Maps to exit code 3 in the CLI.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Bad command line (unknown flag, missing required value). Exit code 1.
class UsageError : public std::runtime_error {
 public:
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace laborcast
