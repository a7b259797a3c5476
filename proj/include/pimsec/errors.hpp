#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pimsec {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownKeyError : public Error {
 public:
  using Error::Error;
};

// A share context (key, version, location) was used to mask data twice.
class VersionReuseError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class CapacityError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A private buffer crossed the host/device channel in plaintext while a
// secure scheme was active.
class TaintError : public Error {
 public:
  using Error::Error;
};

// Raised when a linear-kernel check (FTag_e vs FTag_r) does not match.
class VerificationFailure : public Error {
 public:
  VerificationFailure(std::string step, std::size_t event_index)
      : Error("verification failed at " + step), step_(std::move(step)), event_index_(event_index) {}

  const std::string& step() const { return step_; }
  std::size_t event_index() const { return event_index_; }

 private:
  std::string step_;
  std::size_t event_index_;
};

// A garbled row or output label did not decode: the garbled material was
// modified after garbling.
class GcEvaluationFault : public Error {
 public:
  using Error::Error;
};

}  // namespace pimsec
