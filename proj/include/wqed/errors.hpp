#pragma once

#include <stdexcept>
#include <string>

namespace wqed {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Physically invalid parameter set (negative rates, Γ_φ2 < 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Missing or malformed configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class DegenerateSpectrumError : public Error {
 public:
  using Error::Error;
};

class NoSteadyStateError : public Error {
 public:
  using Error::Error;
};

class UndefinedScatteringError : public Error {
 public:
  using Error::Error;
};

/// Integrator step size collapsed; `time_ns()` is where it happened.
class StiffnessError : public Error {
 public:
  StiffnessError(const std::string& what, double time_ns)
      : Error(what), time_ns_(time_ns) {}
  double time_ns() const { return time_ns_; }

 private:
  double time_ns_;
};

class AmbiguousFrameError : public Error {
 public:
  using Error::Error;
};

/// Correlation function has not decayed by the end of the horizon.
class HorizonError : public Error {
 public:
  using Error::Error;
};

class ResolutionError : public Error {
 public:
  using Error::Error;
};

class UnknownControlError : public Error {
 public:
  using Error::Error;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value about to be written to an output file.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace wqed
