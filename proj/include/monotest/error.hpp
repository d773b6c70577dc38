#pragma once

#include <stdexcept>
#include <string>

namespace monotest {

// Base class for everything the library throws on bad input or numeric trouble.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed something that violates a precondition (bad flag, bad config).
class UsageError : public Error {
 public:
  using Error::Error;
};

// Input data does not have the expected shape (missing column, bad number).
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Data are well formed but the computation cannot proceed (degenerate
// support, rank-deficient design, non-finite model evaluation).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace monotest
