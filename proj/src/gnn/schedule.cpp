#include <array>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/gnn.hpp"

namespace gnnfuse {

namespace {

// floor(1.3 * d) in exact integer arithmetic.
std::size_t grow(std::size_t d) { return (13 * d) / 10; }

constexpr std::array<ArchitecturePreset, 3> kPresets{{
    {"resnet18", 5, 5, 40, 30},
    {"densenet121", 8, 5, 40, 30},
    {"xception", 6, 9, 40, 30},
}};

}  // namespace

DimensionSchedule::DimensionSchedule(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
  if (dims_.size() < 2) throw ValidationError("schedule: need at least one layer");
  for (std::size_t d : dims_)
    if (d == 0) throw ValidationError("schedule: zero layer width");
  if (dims_.back() != 1) throw ValidationError("schedule: final width must be 1");
  const std::size_t l_count = dims_.size() - 1;
  for (std::size_t l = 2; l < l_count; ++l) {
    if (dims_[l] != grow(dims_[l - 1])) {
      throw ValidationError("schedule: width d_" + std::to_string(l) + "=" +
                            std::to_string(dims_[l]) + " breaks the floor(1.3 d) recurrence");
    }
  }
}

DimensionSchedule DimensionSchedule::make(std::size_t inputs, std::size_t first_width,
                                          std::size_t layers) {
  if (layers == 0) throw ValidationError("schedule: need at least one layer");
  std::vector<std::size_t> dims{inputs};
  if (layers >= 2) dims.push_back(first_width);
  while (dims.size() < layers) dims.push_back(grow(dims.back()));
  dims.push_back(1);
  return DimensionSchedule(std::move(dims));
}

std::span<const ArchitecturePreset> architecture_presets() { return kPresets; }

const ArchitecturePreset& architecture_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return p;
  throw ValidationError("unknown architecture preset '" + std::string(name) + "'");
}

}  // namespace gnnfuse
