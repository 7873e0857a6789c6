#pragma once

#include <stdexcept>
#include <string>

namespace bezred {

// Violated precondition or invalid input (bad index, degree, weight, order).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Continuity order outside the supported range -1..3.
class UnsupportedOrderError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Numerical failure: indefinite models, non-finite values, solver breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Gram factorization failed; carries the estimated 2-norm condition number.
class IllConditionedError : public NumericalError {
 public:
  IllConditionedError(const std::string& what, double condition)
      : NumericalError(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

// Singular parameter system, e.g. an unidentifiable continuity parameter.
class DegenerateProblemError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace bezred
