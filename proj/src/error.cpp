#include "zpd/error.hpp"

namespace zpd {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::domain:
      return "domain";
    case ErrorKind::insufficient_data:
      return "insufficient-data";
    case ErrorKind::degenerate:
      return "degenerate";
    case ErrorKind::validity:
      return "validity";
    case ErrorKind::singularity:
      return "singularity";
    case ErrorKind::fit:
      return "fit";
    case ErrorKind::parse:
      return "parse";
    case ErrorKind::config:
      return "config";
    case ErrorKind::io:
      return "io";
  }
  return "unknown";
}

}  // namespace zpd
