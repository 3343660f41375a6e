#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xes {

/// Lookup miss (e.g. unknown benchmark name).
class NotFoundError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or mis-ordered log line; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Prompt does not fit the model's configured context length.
class ContextOverflowError : public std::runtime_error {
 public:
  ContextOverflowError(std::size_t estimate, std::size_t context_length)
      : std::runtime_error("prompt estimate of " + std::to_string(estimate) +
                           " tokens exceeds context length " + std::to_string(context_length)),
        estimate_(estimate),
        context_length_(context_length) {}

  std::size_t estimate() const { return estimate_; }
  std::size_t context_length() const { return context_length_; }

 private:
  std::size_t estimate_;
  std::size_t context_length_;
};

/// Non-success HTTP status from a chat endpoint, with the response body.
class HttpError : public std::runtime_error {
 public:
  HttpError(int status, const std::string& body)
      : std::runtime_error("HTTP status " + std::to_string(status) + ": " + body), status_(status) {}

  int status() const { return status_; }

 private:
  int status_;
};

}  // namespace xes
