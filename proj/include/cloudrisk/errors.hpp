#pragma once

#include <stdexcept>
#include <string>

namespace cloudrisk {

// All library failures derive from Error so callers can catch one type at the
// CLI boundary and still discriminate where it matters.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Capacity violation or no feasible server.
class PlacementError : public Error {
 public:
  using Error::Error;
};

// Operation is illegal in the current state (e.g. double assignment).
class StateError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Malformed or mismatched input data (dimensions, rows, records).
class InputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Persisted artifact carries a schema version this build cannot read.
class VersionError : public Error {
 public:
  VersionError(const std::string& artifact, int found, int expected)
      : Error(artifact + ": schema version " + std::to_string(found) +
              " is not supported (expected " + std::to_string(expected) +
              ")"),
        found_(found),
        expected_(expected) {}

  int found() const { return found_; }
  int expected() const { return expected_; }

 private:
  int found_;
  int expected_;
};

}  // namespace cloudrisk
