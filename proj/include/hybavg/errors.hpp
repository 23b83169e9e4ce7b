#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hybavg {

/// Root of all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller-side problems: bad parameters, violated preconditions, malformed
/// systems. The CLI maps these to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// Failures of a numerical procedure on valid input. CLI exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public UsageError {
 public:
  using UsageError::UsageError;
};

class InvalidParams : public UsageError {
 public:
  using UsageError::UsageError;
};

class InvalidSystem : public UsageError {
 public:
  explicit InvalidSystem(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class StateEscape : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StepFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoCrossing : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Tangency : public NumericalError {
 public:
  Tangency(const std::string& what, double transversality)
      : NumericalError(what), transversality_(transversality) {}
  double transversality() const noexcept { return transversality_; }

 private:
  double transversality_;
};

class QuadratureFailure : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoLiftoff : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonPhysical : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace hybavg
