#include "gnnfuse/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gnnfuse/errors.hpp"

namespace gnnfuse {

namespace {

struct Probe {
  double value;
  std::vector<bool> pattern;
};

Probe evaluate(const ScalarFunction& f) {
  Tape tape;
  Var loss = f(tape);
  const Matrix& v = tape.value(loss);
  if (v.size() != 1) throw ShapeError("gradient check: function is not scalar");
  if (!std::isfinite(v[0])) throw NumericalError("gradient check: non-finite loss at probe point");
  return {v[0], tape.kink_pattern()};
}

}  // namespace

GradCheckResult finite_difference_check(const ScalarFunction& f,
                                        std::span<Parameter* const> params, double step,
                                        bool fault_injection) {
  if (!(step > 0.0)) throw ValidationError("gradient check: step must be positive");

  std::vector<Matrix> analytic;
  std::vector<bool> base_pattern;
  {
    Tape tape;
    tape.set_fault_injection(fault_injection);
    Var loss = f(tape);
    if (!std::isfinite(tape.value(loss)[0])) {
      throw NumericalError("gradient check: non-finite loss at base point");
    }
    for (Parameter* p : params) p->grad = Matrix(p->value.rows(), p->value.cols());
    tape.backward(loss);
    base_pattern = tape.kink_pattern();
    for (Parameter* p : params) analytic.push_back(p->grad);
  }

  GradCheckResult result;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Parameter& p = *params[pi];
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double original = p.value[i];
      p.value[i] = original + step;
      const Probe plus = evaluate(f);
      p.value[i] = original - step;
      const Probe minus = evaluate(f);
      p.value[i] = original;

      if (plus.pattern != base_pattern || minus.pattern != base_pattern) {
        ++result.skipped;
        continue;
      }
      ++result.probes;
      const double numeric = (plus.value - minus.value) / (2.0 * step);
      const double exact = analytic[pi][i];
      const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-6});
      const double err = std::abs(exact - numeric) / denom;
      if (result.probes == 1 || err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p.name;
        result.worst_index = i;
        result.worst_analytic = exact;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace gnnfuse
