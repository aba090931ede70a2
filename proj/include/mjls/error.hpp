#pragma once

#include <stdexcept>
#include <string>

namespace mjls {

/// Input that violates a type invariant or an operation precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge (eigen-iteration, etc.).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mjls
