#pragma once

#include <stdexcept>
#include <string>

namespace diffatd {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: configuration values, ranges, file contents.
/// The CLI maps these to exit code 1.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class InvalidRange : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class DimensionMismatch : public InvalidArgument {
 public:
  DimensionMismatch(const std::string& what, std::size_t expected, std::size_t got);
};

class UnknownLocation : public InvalidArgument {
 public:
  UnknownLocation(std::size_t location, std::size_t count);
};

class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& key, const std::string& message);
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ParseError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Contract violations detected while running (e.g. re-measuring a cell).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

class RepeatMeasurement : public RuntimeFailure {
 public:
  explicit RepeatMeasurement(std::size_t location);
};

class ExhaustedCandidates : public RuntimeFailure {
 public:
  ExhaustedCandidates() : RuntimeFailure("no unmeasured candidate locations remain") {}
};

class EmptyDataset : public InvalidArgument {
 public:
  EmptyDataset() : InvalidArgument("dataset is empty") {}
};

}  // namespace diffatd
