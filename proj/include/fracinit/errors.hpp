#pragma once

#include <stdexcept>
#include <string>

namespace fracinit {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A series hit EvalBudget::max_terms before its tail was certified.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

/// No closed form is available for this parameter combination.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// Requested simulation exceeds the configured cell budget.
class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class InsufficientSamples : public Error {
 public:
  using Error::Error;
};

/// Operation called outside the model it is defined for.
class ScopeError : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

}  // namespace detail
}  // namespace fracinit
