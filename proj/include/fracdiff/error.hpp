#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracdiff {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-resonant closed form requested with lambda too close to lambda_k.
class ResonanceError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Result not representable as a finite double.
class OverflowError : public Error {
 public:
  using Error::Error;
};

// Operator coefficients violate p > 0, q >= 0.
class CoefficientError : public Error {
 public:
  using Error::Error;
};

// Requested more modes than the grid can resolve.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

// Initial and boundary data disagree at a corner of the domain.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

// Input violates a documented precondition of a check.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or mismatched sizes.
class InputError : public Error {
 public:
  using Error::Error;
};

// Evaluation produced an infinity or NaN.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

// Syntax error in an expression; offset is the byte position of the problem.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset,
             std::vector<std::string> expected = {})
      : Error(message), offset_(offset), expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

// Identifier that is neither a variable, a constant nor a known function.
class UnknownIdentifierError : public ParseError {
 public:
  using ParseError::ParseError;
};

}  // namespace fracdiff
