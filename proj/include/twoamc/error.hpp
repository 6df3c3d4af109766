#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace twoamc {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// A value does not belong to the semiring it is used with.
class InvalidValue : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Missing or contradictory task configuration (e.g. no query for SUCC).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A size guard or resource budget was exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace twoamc
