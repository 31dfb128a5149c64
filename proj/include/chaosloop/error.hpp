#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chaosloop {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid distribution parameters or moment requests.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Polynomial or function arity mismatch.
class ArityError : public Error {
 public:
  using Error::Error;
};

// Non-finite integrand, loss of orthogonality, non-finite coefficient.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Located syntax or semantic error in loop source text.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        bare_(message) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }
  const std::string& bare_message() const { return bare_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string bare_;
};

// A polynomial update that cannot be put in affine-plus-lower-part form.
class OrderingError : public Error {
 public:
  using Error::Error;
};

// Monomial closure did not reach a fixpoint under the size guard.
class ClosureError : public Error {
 public:
  using Error::Error;
};

}  // namespace chaosloop
