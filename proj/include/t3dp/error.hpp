#pragma once

#include <stdexcept>
#include <string>

namespace t3dp {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit codes (data errors -> 2, divergence -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DegenerateCameraError : public Error {
 public:
  using Error::Error;
};

class EmptyClipError : public Error {
 public:
  using Error::Error;
};

class TrainingDataError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// File-format failures: parse errors, bad lengths, non-finite payloads.
class FormatError : public Error {
 public:
  using Error::Error;
};

class ChecksumError : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace t3dp
