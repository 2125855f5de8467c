#pragma once

#include <stdexcept>

namespace mobeval {

/// Raised when text input (XML annotations, detection dumps, reports) cannot
/// be parsed. The message carries the offending location when known.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for filesystem-level failures (missing file, unreadable directory).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mobeval
