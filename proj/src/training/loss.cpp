#include <algorithm>
#include <cmath>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/training.hpp"

namespace gnnfuse {

double bce(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size()) throw ShapeError("bce: length mismatch");
  if (predictions.empty()) throw ShapeError("bce: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double q = std::clamp(predictions[i], Tape::kBceClamp, 1.0 - Tape::kBceClamp);
    total += targets[i] * std::log(q) + (1.0 - targets[i]) * std::log1p(-q);
  }
  return -total / static_cast<double>(predictions.size());
}

}  // namespace gnnfuse
