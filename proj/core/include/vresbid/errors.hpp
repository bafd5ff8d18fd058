#pragma once

#include <stdexcept>
#include <string>

namespace vresbid {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file (JSON/CSV syntax, missing keys, wrong types).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A market-clearing LP that has no feasible point (e.g. unservable DAM demand).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// The LP backend failed or returned a solution that does not pass the
// post-solve checks.
class SolverError : public Error {
 public:
  using Error::Error;
};

// Bad study configuration or command-line usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vresbid
