#pragma once

#include <stdexcept>
#include <string>

namespace fdelay {

/// Base of every exception thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A value cannot be represented in double precision, even in scaled form.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// An expression or kernel was evaluated at a declared singular point.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text (expressions, problem configs).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a structural invariant. The message starts
/// with the field path, e.g. "growth[1].eta: ...".
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace fdelay
