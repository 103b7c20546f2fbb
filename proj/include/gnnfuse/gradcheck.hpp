#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "gnnfuse/tape.hpp"

namespace gnnfuse {

// Builds a scalar loss on the given tape. Must be a pure function of the
// current parameter values (no hidden randomness).
using ScalarFunction = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t probes = 0;
  // Coordinates where a ReLU or BCE clamp changed state between the probe
  // points; central differences are meaningless across a kink.
  std::size_t skipped = 0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

// Compares tape gradients of `f` against central differences
// (f(x+h) - f(x-h)) / 2h for every coordinate of every parameter in
// `params`. Relative error uses max(|analytic|, |numeric|, 1e-6) as the
// denominator. Parameters are restored on return.
//
// Throws NumericalError if f is non-finite at any probe point.
GradCheckResult finite_difference_check(const ScalarFunction& f,
                                        std::span<Parameter* const> params, double step,
                                        bool fault_injection = false);

}  // namespace gnnfuse
