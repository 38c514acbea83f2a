#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hairstrand {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller passed arguments that violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Two joints of a segment coincide (length below kMinSegmentLength).
class DegenerateSegment : public Error {
 public:
  using Error::Error;
};

/// An operation needed a non-empty ground truth or target.
class EmptyInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An internal invariant did not hold. Indicates a bug, not bad input.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

enum class FormatErrorKind {
  BadMagic,
  Truncated,
  FlagMismatch,
  CountMismatch,
  Parse,
  Io,
};

std::string to_string(FormatErrorKind kind);

/// Failure reading or writing a file. `position()` is a byte offset for
/// binary formats and a 1-based line number for text formats.
class FormatError : public Error {
 public:
  enum class Unit { Byte, Line };

  FormatError(FormatErrorKind kind, std::string path, std::uint64_t position,
              Unit unit, const std::string& detail);

  FormatErrorKind kind() const noexcept { return kind_; }
  const std::string& path() const noexcept { return path_; }
  std::uint64_t position() const noexcept { return position_; }
  Unit unit() const noexcept { return unit_; }

 private:
  FormatErrorKind kind_;
  std::string path_;
  std::uint64_t position_;
  Unit unit_;
};

}  // namespace hairstrand
