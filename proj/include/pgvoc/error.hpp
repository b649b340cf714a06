// Copyright 2026 The pgvoc Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace pgvoc {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bytes on disk do not follow the expected layout (WAV, tensor file, config).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Inputs violate a documented precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw ValidationError(message);
}

}  // namespace pgvoc
