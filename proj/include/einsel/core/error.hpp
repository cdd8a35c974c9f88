#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace einsel {

// Base for every error the library throws on its own account.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Fock cutoff too small for the requested state or evolution.
class TruncationError : public Error {
 public:
  using Error::Error;
};

class NonPhysicalError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; carries the 1-based offending line (0 when unknown).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace einsel
