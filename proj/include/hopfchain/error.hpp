#pragma once

#include <stdexcept>
#include <string>

namespace hopfchain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonExactDivision : public Error {
 public:
  NonExactDivision() : Error("polynomial division leaves a nonzero remainder") {}
};

class ZeroEvaluationPoint : public Error {
 public:
  ZeroEvaluationPoint() : Error("cannot evaluate negative powers of q at q = 0") {}
};

class OutOfRange : public Error {
 public:
  using Error::Error;
};

class NonPositiveCoefficient : public Error {
 public:
  using Error::Error;
};

class OutOfSupport : public Error {
 public:
  using Error::Error;
};

class NotInvertible : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

}  // namespace hopfchain
