#pragma once

#include <stdexcept>
#include <string>

namespace jcmp {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument value was violated.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Two objects built on different Hilbert spaces were combined.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// The Liouvillian kernel is not one-dimensional, so the steady state is not unique.
class DegenerateKernel : public Error {
 public:
  using Error::Error;
};

/// An adaptive integrator could not meet its tolerance.
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, double time_reached)
      : Error(what + " (time reached: " + std::to_string(time_reached) + ")"),
        time_reached_(time_reached) {}

  double time_reached() const noexcept { return time_reached_; }

 private:
  double time_reached_;
};

/// A normalized intensity correlation was requested for a field with no photons.
class ZeroIntensity : public Error {
 public:
  using Error::Error;
};

/// A stochastic trajectory lost its norm before it could be renormalized.
class NormCollapse : public Error {
 public:
  NormCollapse(const std::string& what, double time)
      : Error(what + " (t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const noexcept { return time_; }

 private:
  double time_;
};

}  // namespace jcmp
