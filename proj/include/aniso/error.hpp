#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

/// Argument outside the domain of an operation (non-finite input, bad sampling range, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A documented precondition does not hold.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input that makes the operation meaningless, e.g. an identically zero field.
class DegenerateInputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A function handed in as an N-function violates one of the N-function properties.
class InvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical limit test could not decide (poor power-law fit, mixed local slopes).
class InconclusiveError : public std::runtime_error {
 public:
  InconclusiveError(const std::string& what, double exponent, double r2)
      : std::runtime_error(what), exponent_(exponent), r2_(r2) {}
  double exponent() const noexcept { return exponent_; }
  double r2() const noexcept { return r2_; }

 private:
  double exponent_;
  double r2_;
};

/// Iterative method failed; carries the best iterate reached.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const std::vector<double>& best_iterate() const noexcept { return best_; }

 private:
  std::vector<double> best_;
};

/// Malformed family spec or configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aniso
