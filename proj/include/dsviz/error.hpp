#pragma once

#include <stdexcept>
#include <string>

namespace dsviz {

/// Bad input: malformed manifest, invalid parameters, precondition violations.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem or codec failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dsviz
