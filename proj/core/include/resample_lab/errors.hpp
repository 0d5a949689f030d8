#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace resample_lab {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// All weights are zero (or the likelihood collapsed on every particle).
class DegenerateWeights : public Error {
 public:
  using Error::Error;
};

// A weight is negative, NaN or infinite.
class InvalidWeight : public Error {
 public:
  using Error::Error;
};

// An argument lies outside its admissible range, e.g. u outside (0, 1].
class OutOfRange : public Error {
 public:
  using Error::Error;
};

class InvalidConfig : public Error {
 public:
  using Error::Error;
};

// Closed forms that only hold for one particle ordering.
class UnsupportedOrdering : public Error {
 public:
  using Error::Error;
};

// The set {x : alpha * g(x) is an integer} carries non-negligible target mass.
class SupportConditionViolated : public Error {
 public:
  using Error::Error;
};

// 1 - nu{floor(alpha g) / alpha} vanishes: residual resampling is
// asymptotically deterministic and the limit variance is undefined.
class DegenerateKappa : public Error {
 public:
  using Error::Error;
};

// A filter step failed; carries the time index at which it happened.
class FilterStepError : public DegenerateWeights {
 public:
  FilterStepError(std::size_t time_index, const std::string& what);

  std::size_t time_index() const noexcept { return time_index_; }

 private:
  std::size_t time_index_;
};

}  // namespace resample_lab
