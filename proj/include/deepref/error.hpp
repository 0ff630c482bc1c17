#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deepref {

// Base for every error raised by the library. The CLI maps the subclasses
// below onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or usage (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Missing or malformed input data (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : DataError(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Violated precondition on a call (bad argument or call in the wrong state).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace deepref
