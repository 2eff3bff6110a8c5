#pragma once

#include <stdexcept>
#include <string>

namespace mixest {

/// Invalid input or precondition violation. Maps to CLI exit code 1.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure (non-finite objective, undefined weights, ...). Exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixest
