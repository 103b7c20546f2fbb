#include <cmath>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/training.hpp"

namespace gnnfuse {

AdamState make_adam(std::span<Parameter* const> params, double lr, double weight_decay) {
  AdamState state;
  state.lr = lr;
  state.weight_decay = weight_decay;
  for (const Parameter* p : params) {
    state.first_moment.emplace_back(p->value.rows(), p->value.cols());
    state.second_moment.emplace_back(p->value.rows(), p->value.cols());
  }
  return state;
}

void adam_step(AdamState& state, std::span<Parameter* const> params) {
  if (params.size() != state.first_moment.size()) {
    throw ShapeError("adam: optimizer state tracks " + std::to_string(state.first_moment.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& p = *params[i];
    if (!p.grad.same_shape(p.value) || !state.first_moment[i].same_shape(p.value)) {
      throw ShapeError("adam: shape mismatch for " + p.name);
    }
    if (!p.grad.all_finite()) throw NumericalError("adam: non-finite gradient in " + p.name);
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  const double decay = 1.0 - state.lr * state.weight_decay;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p.value[k] = p.value[k] * decay - state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
  }
}

}  // namespace gnnfuse
