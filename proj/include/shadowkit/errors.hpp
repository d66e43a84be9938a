#pragma once

#include <stdexcept>
#include <string>

namespace shadowkit {

// Malformed input: unknown generator symbol, dimension mismatch, singular map.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A search or enumeration exceeded its configured budget.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative solve failed to converge.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// The requested operation is not available for this kind of action.
class Unsupported : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// A solver could not produce a result for a well-formed input.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace shadowkit
