#pragma once

// Brute-force reference for the kappa graph: explicit 2x2 tables, kappa in
// floating point, and a rank-count pruning rule with exact rational
// comparison of |kappa|.

#include <cstdint>
#include <cstdlib>
#include <vector>

namespace oracle {

struct Table {
  std::int64_t n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  std::int64_t total() const { return n11 + n10 + n01 + n00; }
};

inline Table contingency(const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>& y) {
  Table t;
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] && y[s]) ++t.n11;
    else if (x[s]) ++t.n10;
    else if (y[s]) ++t.n01;
    else ++t.n00;
  }
  return t;
}

inline double kappa(const Table& t) {
  const double n = static_cast<double>(t.total());
  const double po = static_cast<double>(t.n11 + t.n00) / n;
  const double px1 = static_cast<double>(t.n11 + t.n10) / n;
  const double py1 = static_cast<double>(t.n11 + t.n01) / n;
  const double pe = px1 * py1 + (1.0 - px1) * (1.0 - py1);
  if (pe == 1.0) return 0.0;
  return (po - pe) / (1.0 - pe);
}

// kappa as num / den with den >= 0 (den == 0 means p_e = 1).
struct Ratio {
  __int128 num = 0, den = 0;
};

inline Ratio kappa_ratio(const Table& t) {
  const __int128 n = t.total();
  const __int128 r1 = t.n11 + t.n10, c1 = t.n11 + t.n01;
  const __int128 expected = r1 * c1 + (n - r1) * (n - c1);
  Ratio r{n * (t.n11 + t.n00) - expected, n * n - expected};
  if (r.den == 0) r.num = 0, r.den = 1;
  return r;
}

inline __int128 iabs(__int128 v) { return v < 0 ? -v : v; }

// |a| > |b| exactly.
inline bool stronger(const Ratio& a, const Ratio& b) {
  return iabs(a.num) * b.den > iabs(b.num) * a.den;
}

// Row-major C x C adjacency: entry (j, i) is kappa(j, i) when j is among the
// k strongest nonzero sources into i (ties to the lower index), else 0.
inline std::vector<double> pruned_adjacency(const std::vector<std::vector<std::uint8_t>>& columns,
                                            std::size_t k) {
  const std::size_t c = columns.size();
  std::vector<Ratio> ratio(c * c);
  std::vector<double> value(c * c, 0.0);
  for (std::size_t j = 0; j < c; ++j)
    for (std::size_t i = 0; i < c; ++i)
      if (i != j) {
        const Table t = contingency(columns[j], columns[i]);
        ratio[j * c + i] = kappa_ratio(t);
        value[j * c + i] = kappa(t);
      }
  std::vector<double> adjacency(c * c, 0.0);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = 0; j < c; ++j) {
      if (j == i || ratio[j * c + i].num == 0) continue;
      std::size_t ahead = 0;
      for (std::size_t o = 0; o < c; ++o) {
        if (o == i || o == j) continue;
        const Ratio& other = ratio[o * c + i];
        const bool tie = !stronger(other, ratio[j * c + i]) && !stronger(ratio[j * c + i], other);
        if (stronger(other, ratio[j * c + i]) || (tie && o < j)) ++ahead;
      }
      if (ahead < k) adjacency[j * c + i] = value[j * c + i];
    }
  }
  return adjacency;
}

}  // namespace oracle
