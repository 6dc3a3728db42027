#pragma once

#include <stdexcept>
#include <string>

namespace mqclab {

// Bad inputs: invalid configs, violated preconditions, dimension mismatches.
// The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures: eigensolver non-convergence, stalled fits, amplitude
// consistency violations. The CLI maps these to exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// A spectrum that never drops below A(0)/e inside its order grid has no
// measurable 1/e width. Callers that can continue without a width (e.g.
// second-moment estimators) catch this specifically.
class NoCrossingError : public NumericalError {
 public:
  explicit NoCrossingError(const std::string& what) : NumericalError(what) {}
};

}  // namespace mqclab
