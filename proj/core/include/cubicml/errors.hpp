#pragma once

#include <stdexcept>
#include <string>

namespace cubicml {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed inputs: space specs, configs, parameter files, invariant breaks.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Degenerate or unusable data: all-equal targets, empty splits, corrupt store.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Training blew up numerically (non-finite gradients or parameters).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace cubicml
