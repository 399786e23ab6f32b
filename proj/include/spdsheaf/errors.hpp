#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spdsheaf {

/// Non-finite entries, malformed shapes, or arguments outside their documented range.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A matrix that must be positive definite is not.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Cayley or QR parameterization could not produce an orthogonal matrix.
class ParameterizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation preconditions on the sheaf structure do not hold (e.g. nontrivial holonomy).
class NotApplicable : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace spdsheaf
