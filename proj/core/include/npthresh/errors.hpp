#pragma once

#include <stdexcept>
#include <string>

namespace npthresh {

// Base class for everything thrown by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid arguments or configuration (bad bandwidth, dimension mismatch, ...).
class DomainError : public Error {
public:
  using Error::Error;
};

// Dataset problems: missing file, missing column, no usable rows.
class DataError : public Error {
public:
  using Error::Error;
};

// Estimation failures: empty or under-populated regimes.
class EstimationError : public Error {
public:
  EstimationError(const std::string& what, double lo, double hi)
      : Error(what), interval_lo(lo), interval_hi(hi) {}
  explicit EstimationError(const std::string& what) : Error(what) {}
  double interval_lo = 0.0;
  double interval_hi = 0.0;
};

// Inference failures: thin candidate splits, degenerate variances,
// no viable candidates in a regime.
class TestError : public Error {
public:
  explicit TestError(const std::string& what, double tau = 0.0)
      : Error(what), tau(tau) {}
  double tau;
};

// Threshold search failures: no feasible grid point.
class SearchError : public Error {
public:
  using Error::Error;
};

}  // namespace npthresh
