#pragma once

#include <stdexcept>
#include <string>

namespace cdc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A malformed network file. Carries the 1-based line and the offending token.
class ParseError : public Error {
 public:
  ParseError(int line, std::string token, const std::string& message)
      : Error("line " + std::to_string(line) + ": " + message),
        line_(line),
        token_(std::move(token)),
        detail_(message) {}

  int line() const noexcept { return line_; }
  const std::string& token() const noexcept { return token_; }
  /// The message without the line prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  int line_;
  std::string token_;
  std::string detail_;
};

}  // namespace cdc
