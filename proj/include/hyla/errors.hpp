#pragma once

#include <stdexcept>
#include <string>

namespace hyla {

// Bad user input: flags, shapes that do not line up, malformed dataset files.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape/arity problems between configuration pieces.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Malformed input file; message carries "file:line".
class IngestError : public ValidationError {
 public:
  IngestError(const std::string& file, std::size_t line, const std::string& what)
      : ValidationError(file + ":" + std::to_string(line) + ": " + what) {}
  explicit IngestError(const std::string& what) : ValidationError(what) {}
};

// Caller broke a documented precondition (asymmetric adjacency, transductive
// input to an inductive-only routine, ...).
class ContractError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Point outside the open unit ball, or evaluation too close to the boundary.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// NaN/Inf in a gradient or loss. The CLI maps these to exit code 2.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hyla
