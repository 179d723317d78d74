#pragma once

#include <stdexcept>
#include <string>

namespace mixspin {

// Bad input: malformed spec, invalid site index, infeasible method choice.
// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure: non-convergence, ill-conditioned subtraction, sign
// violation in the sampler. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixspin
