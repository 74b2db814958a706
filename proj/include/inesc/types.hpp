#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace inesc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

using AgentIndex = std::size_t;

// Error hierarchy. The CLI maps each family to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input (dimensions, gains, unknown keys).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values appeared while integrating.
class BlowUpError : public Error {
 public:
  BlowUpError(const std::string& what, double time)
      : Error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

// A standing assumption of the method does not hold (e.g. mu <= 0).
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

// The requested operation is not available for this game/controller.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to converge.
class SolverError : public Error {
 public:
  using Error::Error;
};

// A state left its admissible set, or results contradict a certified fact.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Recorded data is insufficient or numerically unusable for a diagnostic.
class DiagnosticError : public Error {
 public:
  using Error::Error;
};

inline void require_dim(Eigen::Index got, Eigen::Index want,
                        const char* what) {
  if (got != want) {
    throw ConfigError(std::string(what) + ": dimension " +
                      std::to_string(got) + ", expected " +
                      std::to_string(want));
  }
}

}  // namespace inesc

namespace inesc {

// A requested window or index lies outside the recorded data.
class RangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace inesc
