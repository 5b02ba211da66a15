#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlpflow {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed expression or problem document. `offset` is a byte offset into
/// the offending text, `line` a 1-based line number (0 when not applicable).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset, std::size_t line = 0)
      : Error(what), offset_(offset), line_(line) {}

  std::size_t offset() const noexcept { return offset_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t offset_;
  std::size_t line_;
};

/// Evaluation produced a non-finite value (division by zero, overflow).
class EvalError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization hit a non-positive pivot.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot_index,
                     double pivot)
      : Error(what), pivot_index_(pivot_index), pivot_(pivot) {}

  std::size_t pivot_index() const noexcept { return pivot_index_; }
  double pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_index_;
  double pivot_;
};

/// Invalid problem data, dimensions or parameters.
class ModelError : public Error {
 public:
  using Error::Error;
};

}  // namespace nlpflow
