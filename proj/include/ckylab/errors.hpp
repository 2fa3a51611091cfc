#pragma once

#include <stdexcept>
#include <string>

namespace ckylab {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (bad JSON, wrong dimensions, violated
/// family constraints). The CLI maps it to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace ckylab
