// Copyright 2026 The hyperrec Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace hyperrec {

// Every failure raised by the core derives from Error. The C API maps the
// concrete type onto a status code, so keep the hierarchy flat.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (names the offending line where possible).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration: unknown keys, out-of-range values, inconsistent inputs.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file or directory could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Negative sampling has no admissible candidate.
class SamplingError : public Error {
 public:
  using Error::Error;
};

/// A loss or gradient became non-finite.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace hyperrec
