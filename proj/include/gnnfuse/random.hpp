#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace gnnfuse {

// Seeded generator with distribution code of our own, so a seed produces the
// same stream with any standard library. Independent streams for the same
// seed are selected with `stream`.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::size_t below(std::size_t n);
  double normal();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gnnfuse
