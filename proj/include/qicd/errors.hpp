#pragma once

#include <stdexcept>
#include <string>

namespace qicd {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller asked for something the API does not support (wrong model,
// empty input, out-of-range index). Maps to CLI exit status 1.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An iterative routine exhausted its budget. Maps to CLI exit status 2.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qicd
