#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace logsynth {

// Base for every error the library reports. Callers that only need a message
// can catch this; the CLI maps it to a nonzero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Syntax error in a MiniLang unit. `line` and `column` are 1-based; a column
// one past the last character denotes end of input.
class ParseError : public Error {
 public:
  ParseError(std::string path, int line, int column, const std::string& message)
      : Error(path + ":" + std::to_string(line) + ":" + std::to_string(column) +
              ": " + message),
        path_(std::move(path)),
        line_(line),
        column_(column),
        message_(message) {}

  const std::string& path() const { return path_; }
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string path_;
  int line_;
  int column_;
  std::string message_;
};

// Semantic error while lowering parsed methods (unresolved callee, duplicate
// method across units).
class LoweringError : public Error {
 public:
  using Error::Error;
};

// Malformed model, annotation, dataset or config file. `line` is 0 when the
// problem is not tied to a single record.
class FormatError : public Error {
 public:
  FormatError(std::string path, std::size_t line, const std::string& message)
      : Error(line == 0 ? path + ": " + message
                        : path + ":" + std::to_string(line) + ": " + message),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A model, annotation set or parameter set that violates an invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Generation parameters that cannot be satisfied by the analyzed program.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A walk that ran out of admissible choices.
class ExhaustionError : public Error {
 public:
  using Error::Error;
};

// An ANOMALY walk requested from an entry that cannot reach any seed.
class UnreachableSeedError : public ExhaustionError {
 public:
  using ExhaustionError::ExhaustionError;
};

}  // namespace logsynth
