#pragma once

#include <stdexcept>
#include <string>

namespace ecodrive {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a value outside an operation's domain (NaN, negative
/// distance, zero-length vector, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A map, scenario config or log document failed validation.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// No heading-consistent lane segment within the match radius.
class NoMatchError : public Error {
 public:
  using Error::Error;
};

/// The matched lane chain has no signal downstream.
class NoSignalError : public Error {
 public:
  using Error::Error;
};

/// Socket setup or transport failure.
class NetworkError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecodrive
