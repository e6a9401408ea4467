#pragma once

#include <stdexcept>
#include <string>

namespace fcl {

/// Bad input: malformed rows, violated preconditions, unknown options.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed to converge or produced non-finite values.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fcl
