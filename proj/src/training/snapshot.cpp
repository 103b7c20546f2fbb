#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/training.hpp"

namespace gnnfuse {

double cosine_lr(const SnapshotSchedule& schedule, std::size_t global_update) {
  if (schedule.updates_per_cycle == 0) throw ValidationError("cosine_lr: empty cycle");
  const std::size_t t = global_update % schedule.updates_per_cycle;
  const double phase = static_cast<double>(t) / static_cast<double>(schedule.updates_per_cycle);
  return 0.5 * schedule.lr_max * (1.0 + std::cos(std::numbers::pi * phase));
}

std::vector<SnapshotRecord> select_top_q(std::span<const SnapshotRecord> records, std::size_t q) {
  if (q > records.size()) {
    throw ValidationError("select_top_q: q=" + std::to_string(q) + " exceeds " +
                          std::to_string(records.size()) + " snapshots");
  }
  std::vector<SnapshotRecord> sorted(records.begin(), records.end());
  // An undefined metric (NaN) ranks below every real value.
  auto key = [](const SnapshotRecord& r) {
    return std::isnan(r.metric) ? -std::numeric_limits<double>::infinity() : r.metric;
  };
  std::stable_sort(sorted.begin(), sorted.end(), [&](const SnapshotRecord& a, const SnapshotRecord& b) {
    if (key(a) != key(b)) return key(a) > key(b);
    return a.cycle < b.cycle;
  });
  sorted.resize(q);
  return sorted;
}

}  // namespace gnnfuse
