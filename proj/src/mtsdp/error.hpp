#pragma once

#include <stdexcept>
#include <string>

namespace mtsdp {

// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (corpus files, embeddings, checkpoints).
class DataError : public Error {
 public:
  DataError(const std::string& what, int line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Invalid configuration or arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Violated precondition inside the numeric or decoding code.
class LogicError : public Error {
 public:
  using Error::Error;
};

}  // namespace mtsdp
