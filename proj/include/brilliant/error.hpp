#pragma once

#include <stdexcept>
#include <string>

namespace brilliant {

// Base of every error the library raises. Subclasses only differ in how the
// CLI maps them to exit codes and how callers choose to recover.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed text input (FEN, SAN, PGN, JSON artifacts).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input describing an impossible object (e.g. two white kings).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class IllegalMoveError : public Error {
 public:
  using Error::Error;
};

// Input data unusable for the requested operation (empty sets, single-class
// folds, missing artifacts, shape mismatches).
class DataError : public Error {
 public:
  using Error::Error;
};

// Network or process I/O failure.
class TransportError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public TransportError {
 public:
  using TransportError::TransportError;
};

}  // namespace brilliant
