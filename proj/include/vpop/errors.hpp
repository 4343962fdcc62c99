#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vpop {

// Bad configuration or caller misuse (maps to exit code 2).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Input data that cannot be used: malformed files, empty sample sets,
// values outside the operation's domain (exit code 3).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : DataError {
  ParseError(const std::string& what, std::uint64_t line_number)
      : DataError("line " + std::to_string(line_number) + ": " + what),
        line(line_number) {}
  std::uint64_t line;
};

// Numerical failure: non-finite objective, diverging solver (exit code 4).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace vpop
