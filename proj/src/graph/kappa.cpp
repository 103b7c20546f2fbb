#include <cstdint>
#include <set>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/graph.hpp"

namespace gnnfuse {

LabelMatrix::LabelMatrix(std::vector<std::string> classes, std::vector<std::string> sample_ids,
                         std::vector<std::uint8_t> values)
    : classes_(std::move(classes)), sample_ids_(std::move(sample_ids)), values_(std::move(values)) {
  if (classes_.size() < 2) throw ValidationError("label matrix needs at least 2 classes");
  if (sample_ids_.empty()) throw ValidationError("label matrix has no samples");
  if (values_.size() != classes_.size() * sample_ids_.size()) {
    throw ShapeError("label matrix: value count does not match samples x classes");
  }
  if (std::set<std::string>(classes_.begin(), classes_.end()).size() != classes_.size()) {
    throw ValidationError("label matrix: duplicate class names");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (values_[i] > 1) {
      throw ValidationError("label matrix: non-binary entry at sample " +
                            sample_ids_[i / classes_.size()] + ", class " +
                            classes_[i % classes_.size()]);
    }
  }
}

std::vector<std::uint8_t> LabelMatrix::column(std::size_t cls) const {
  std::vector<std::uint8_t> out(samples());
  for (std::size_t s = 0; s < samples(); ++s) out[s] = at(s, cls);
  return out;
}

LabelMatrix LabelMatrix::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > samples()) throw ValidationError("label matrix: bad slice range");
  std::vector<std::string> ids(sample_ids_.begin() + static_cast<std::ptrdiff_t>(begin),
                               sample_ids_.begin() + static_cast<std::ptrdiff_t>(end));
  std::vector<std::uint8_t> vals(values_.begin() + static_cast<std::ptrdiff_t>(begin * classes()),
                                 values_.begin() + static_cast<std::ptrdiff_t>(end * classes()));
  return LabelMatrix(classes_, std::move(ids), std::move(vals));
}

// Kappa is evaluated as one division of two exact integers,
//   (n (n11 + n00) - E) / (n^2 - E),  E = r1 c1 + r0 c0,
// so kappa values that are equal as rationals are equal as doubles and
// magnitude ties are detected exactly during pruning.
KappaStats cohen_kappa(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y) {
  if (x.size() != y.size()) throw ValidationError("cohen_kappa: length mismatch");
  if (x.empty()) throw ValidationError("cohen_kappa: empty input");
  std::int64_t n11 = 0, n10 = 0, n01 = 0, n00 = 0;
  for (std::size_t s = 0; s < x.size(); ++s) {
    if (x[s] > 1 || y[s] > 1) throw ValidationError("cohen_kappa: non-binary entry");
    if (x[s] && y[s]) ++n11;
    else if (x[s]) ++n10;
    else if (y[s]) ++n01;
    else ++n00;
  }
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  const std::int64_t r1 = n11 + n10, r0 = n01 + n00;
  const std::int64_t c1 = n11 + n01, c0 = n10 + n00;
  const __int128 expected = static_cast<__int128>(r1) * c1 + static_cast<__int128>(r0) * c0;
  const __int128 num = static_cast<__int128>(n) * (n11 + n00) - expected;
  const __int128 den = static_cast<__int128>(n) * n - expected;

  KappaStats stats;
  const double nd = static_cast<double>(n);
  stats.observed = static_cast<double>(n11 + n00) / nd;
  stats.chance = static_cast<double>(expected) / (nd * nd);
  if (den == 0) {
    stats.chance = 1.0;
    stats.kappa = 0.0;
  } else {
    stats.kappa = static_cast<double>(num) / static_cast<double>(den);
  }
  return stats;
}

Matrix kappa_matrix(const LabelMatrix& labels) {
  const std::size_t c = labels.classes();
  std::vector<std::vector<std::uint8_t>> columns;
  columns.reserve(c);
  for (std::size_t i = 0; i < c; ++i) columns.push_back(labels.column(i));
  Matrix kappa(c, c);
  for (std::size_t i = 0; i < c; ++i) {
    for (std::size_t j = i + 1; j < c; ++j) {
      const double v = cohen_kappa(columns[i], columns[j]).kappa;
      kappa(i, j) = v;
      kappa(j, i) = v;
    }
  }
  return kappa;
}

}  // namespace gnnfuse
