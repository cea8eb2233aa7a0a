#pragma once

#include <stdexcept>
#include <string>

#include "congame/types.hpp"

namespace congame {

/// Base for everything thrown by this library. `kind()` is a stable
/// machine-readable tag; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& msg)
      : std::runtime_error(msg), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& where, Index expected, Index got)
      : Error("dimension_mismatch",
              where + ": expected dimension " + std::to_string(expected) +
                  ", got " + std::to_string(got)),
        expected(expected),
        got(got) {}
  Index expected, got;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& msg)
      : Error("invalid_argument", msg) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& msg)
      : Error("numerical_error", msg) {}
};

/// Iterative solver stopped before reaching its tolerance. Carries the
/// final residuals so callers can decide whether "close" is close enough.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double stationarity,
                   double feasibility, double complementarity,
                   Index iterations)
      : Error("convergence_failure", msg),
        stationarity(stationarity),
        feasibility(feasibility),
        complementarity(complementarity),
        iterations(iterations) {}
  double stationarity, feasibility, complementarity;
  Index iterations;
};

/// A guarantee was requested under hypotheses the inputs do not satisfy.
/// `failing_step` is the first step index where the hypothesis broke
/// (-1 when the failure is not tied to a step).
class HypothesisError : public Error {
 public:
  HypothesisError(const std::string& msg, Index failing_step = -1)
      : Error("hypothesis_violation", msg), failing_step(failing_step) {}
  Index failing_step;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error("io_error", msg) {}
};

}  // namespace congame
