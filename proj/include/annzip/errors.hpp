#pragma once

#include <stdexcept>
#include <string>

namespace annzip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A symbol with zero mass was handed to an entropy coder.
class ModelCoverageError : public Error {
 public:
  using Error::Error;
};

/// The coder needed a spilled word but the tail was empty.
class TruncatedStreamError : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation (bound = 0, j >= bound, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// An index/occurrence/rank query is out of range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// Violated set semantics: duplicate insert, removal of an absent value, ...
class LogicError : public Error {
 public:
  using Error::Error;
};

/// Decoded data failed a consistency check.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

/// Malformed serialized bytes (bad magic, bad length header, truncated varint, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not supported by the configured backend.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

}  // namespace annzip
