#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace amrgen {

// Error families map onto the CLI exit codes (2 config, 3 data, 4 numeric).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by the PENMAN reader; line and column are 1-based.
class PenmanError : public DataError {
 public:
  PenmanError(const std::string& what, std::size_t line, std::size_t column)
      : DataError(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace amrgen
