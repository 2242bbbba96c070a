#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace xpl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpecError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class UnsupportedActivationError : public Error {
 public:
  using Error::Error;
};

/// A closed-form evaluator was asked for parameters outside the range its
/// derivation assumes. The message names the violated assumption.
class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateTrajectoryError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class NonFiniteLossError : public Error {
 public:
  NonFiniteLossError(const std::string& what, std::size_t batch_index)
      : Error(what), batch_index_(batch_index) {}
  std::size_t batch_index() const noexcept { return batch_index_; }

 private:
  std::size_t batch_index_;
};

}  // namespace xpl
