#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace muskat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

/// Raised when c_inf + f - h <= 0 somewhere; carries the offending node.
class AdmissibilityError : public Error {
 public:
  AdmissibilityError(const std::string& what, std::size_t node, double gap)
      : Error(what), node_(node), gap_(gap) {}
  std::size_t node() const noexcept { return node_; }
  double gap() const noexcept { return gap_; }

 private:
  std::size_t node_;
  double gap_;
};

/// Evaluation point too close to an interface for bulk quadrature.
class TooCloseError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values, step-size collapse and similar solver breakdowns.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace muskat
