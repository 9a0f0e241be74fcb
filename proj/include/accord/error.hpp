/**
 * @file error.hpp
 * @brief Exception types shared across the engine.
 *
 * Every error the engine raises derives from accord::Error. The subclasses
 * tell the CLI which exit code to use and the service which status to send.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace accord {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or invariant-violating input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// File-system failures (missing file, unreadable, unwritable).
class IoError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace accord
