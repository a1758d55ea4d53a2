#pragma once

#include <stdexcept>
#include <string>

namespace commcost {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (k out of range, bad rank, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A CompressedMessage or its byte encoding is malformed.
class DecodeError : public Error {
 public:
  using Error::Error;
};

/// Least-squares design matrix is singular (all sizes equal).
class DegenerateDesignError : public Error {
 public:
  using Error::Error;
};

/// Degenerate time model (alpha = beta = 0).
class DegenerateModelError : public Error {
 public:
  using Error::Error;
};

/// Simulated objective blew past the divergence guard.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed CSV or key-value input.
class ParseError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

}  // namespace commcost
