#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dppcond {

/// Interval of the real line. Endpoints may be infinite.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains_open(double x) const { return x > lo && x < hi; }
  bool contains(const Interval& other) const { return other.lo >= lo && other.hi <= hi; }
  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
  double midpoint() const { return 0.5 * (lo + hi); }
};

inline Interval real_line() {
  return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
}

/// Precondition violated by the caller (bad parameter, point outside a domain, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A particle sits on a singular point of a multiplicative functional.
class SingularConfiguration : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An eigen-decomposition, quadrature or sampling routine could not meet its tolerance.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dppcond
