#pragma once

#include <stdexcept>
#include <string>

namespace dualsplit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error("dimension mismatch: " + msg) {}
};

class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& msg) : Error("not positive definite: " + msg) {}
};

class NoConvergence : public Error {
 public:
  explicit NoConvergence(const std::string& msg) : Error("no convergence: " + msg) {}
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string& msg) : Error("invalid parameter: " + msg) {}
};

class StepTooLarge : public Error {
 public:
  explicit StepTooLarge(const std::string& msg) : Error("step too large: " + msg) {}
};

class NonFiniteIterate : public Error {
 public:
  explicit NonFiniteIterate(const std::string& msg) : Error("non-finite iterate: " + msg) {}
};

class InsufficientSeeds : public Error {
 public:
  explicit InsufficientSeeds(const std::string& msg) : Error("insufficient seeds: " + msg) {}
};

class Infeasible : public Error {
 public:
  explicit Infeasible(const std::string& msg) : Error("infeasible: " + msg) {}
};

class MaxIterations : public Error {
 public:
  explicit MaxIterations(const std::string& msg) : Error("iteration limit reached: " + msg) {}
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error("parse error: " + msg) {}
};

class StateDiverged : public Error {
 public:
  explicit StateDiverged(const std::string& msg) : Error("state diverged: " + msg) {}
};

}  // namespace dualsplit
