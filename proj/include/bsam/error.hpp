#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bsam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or batch dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

// A label or value fell outside its admissible interval.
class RangeError : public Error {
 public:
  RangeError(const std::string& what, double value) : Error(what), value_(value) {}
  double value() const { return value_; }

 private:
  double value_;
};

// Non-finite intermediate; `index` names the offending coordinate when known.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, std::ptrdiff_t index = -1)
      : Error(what), index_(index) {}
  std::ptrdiff_t index() const { return index_; }

 private:
  std::ptrdiff_t index_;
};

class DivergedError : public Error {
 public:
  DivergedError(const std::string& what, std::size_t epoch, std::size_t batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bsam
