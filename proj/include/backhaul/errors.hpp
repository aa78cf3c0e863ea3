#pragma once

#include <stdexcept>
#include <string>

namespace backhaul {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class InvalidConfigError : public Error {
public:
  using Error::Error;
};

/// Input outside the domain of a propagation model (e.g. d < 1 m).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A sub-6 operation was asked about a mmW resource block, or vice versa.
class WrongBandError : public Error {
public:
  using Error::Error;
};

class ParseError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

/// Exhaustive search requested on an instance larger than it supports.
class SizeError : public Error {
public:
  using Error::Error;
};

/// A Matching whose assigned/owner_of views disagree.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

}  // namespace backhaul
