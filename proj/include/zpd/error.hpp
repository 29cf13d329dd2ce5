#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zpd {

/// Failure categories. The CLI prints these as `error[<kind>]: ...`.
enum class ErrorKind {
  domain,
  insufficient_data,
  degenerate,
  validity,
  singularity,
  fit,
  parse,
  config,
  io,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) {
    throw Error(kind, message);
  }
}

}  // namespace zpd
