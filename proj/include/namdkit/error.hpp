#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace namdkit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text-format parse failure. `line()` is 1-based, 0 when not applicable.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyStructureError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A DCD record whose length markers disagree with each other or with the
/// size the format requires at that position.
class CorruptRecordError : public Error {
 public:
  CorruptRecordError(const std::string& what, std::uint64_t offset)
      : Error("byte offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// The trajectory ended in the middle of a frame.
class PartialTrajectoryError : public Error {
 public:
  PartialTrajectoryError(std::size_t frames_read, std::uint64_t offset)
      : Error("truncated frame at byte offset " + std::to_string(offset) + " after " +
              std::to_string(frames_read) + " complete frame(s)"),
        frames_read_(frames_read),
        offset_(offset) {}
  std::size_t frames_read() const noexcept { return frames_read_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::size_t frames_read_;
  std::uint64_t offset_;
};

/// Bad argument values: mismatched lengths, non-positive masses, out-of-range
/// selections and similar.
class DomainError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCellError : public DomainError {
 public:
  using DomainError::DomainError;
};

class DegenerateInputError : public DomainError {
 public:
  using DomainError::DomainError;
};

class InsufficientDataError : public DomainError {
 public:
  using DomainError::DomainError;
};

class MissingRadiusError : public DomainError {
 public:
  using DomainError::DomainError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FetchError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public FetchError {
 public:
  using FetchError::FetchError;
};

/// One problem found while reading a job specification.
struct SchemaIssue {
  std::string path;
  std::string message;
};

class SchemaError : public Error {
 public:
  explicit SchemaError(std::vector<SchemaIssue> issues)
      : Error(format(issues)), issues_(std::move(issues)) {}
  const std::vector<SchemaIssue>& issues() const noexcept { return issues_; }

 private:
  static std::string format(const std::vector<SchemaIssue>& issues) {
    std::string out = "job spec schema error";
    for (const auto& issue : issues) out += "\n  " + issue.path + ": " + issue.message;
    return out;
  }
  std::vector<SchemaIssue> issues_;
};

/// Config generation was asked for a spec that still carries validation errors.
class RefusalError : public Error {
 public:
  using Error::Error;
};

}  // namespace namdkit
