#pragma once

#include <stdexcept>
#include <string>

namespace tatret {

inline constexpr const char* kVersion = "0.1.0";

/// Raised when an object is asked to do something its current state cannot
/// support (empty mask, missing gallery, non-finite training loss, ...).
class InvalidStateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for filesystem and decode/encode failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tatret
