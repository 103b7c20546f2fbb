#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gnnfuse/matrix.hpp"
#include "json.hpp"

namespace gnnfuse {

// Binary ground truth, one row per sample. Uncertain labels are mapped to
// 0 by the loaders before a LabelMatrix is formed.
class LabelMatrix {
 public:
  LabelMatrix(std::vector<std::string> classes, std::vector<std::string> sample_ids,
              std::vector<std::uint8_t> values);

  std::size_t samples() const { return sample_ids_.size(); }
  std::size_t classes() const { return classes_.size(); }
  const std::vector<std::string>& class_names() const { return classes_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }

  std::uint8_t at(std::size_t sample, std::size_t cls) const {
    return values_[sample * classes_.size() + cls];
  }
  std::vector<std::uint8_t> column(std::size_t cls) const;
  std::span<const std::uint8_t> row(std::size_t sample) const {
    return std::span<const std::uint8_t>(values_).subspan(sample * classes_.size(),
                                                         classes_.size());
  }

  // Rows [begin, end) as a new matrix.
  LabelMatrix slice(std::size_t begin, std::size_t end) const;

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::string> sample_ids_;
  std::vector<std::uint8_t> values_;
};

struct KappaStats {
  double observed = 0.0;  // p_o
  double chance = 0.0;    // p_e
  double kappa = 0.0;
};

// Cohen's kappa of two binary raters via the 2x2 contingency table.
// When chance agreement is 1 (both raters constant and equal) kappa is 0.
KappaStats cohen_kappa(std::span<const std::uint8_t> x, std::span<const std::uint8_t> y);

// Pairwise kappa of all label columns with a zero diagonal.
Matrix kappa_matrix(const LabelMatrix& labels);

// Directed comorbidity graph. adjacency(j, i) is the weight a_ji of the edge
// j -> i. A vertex's in-neighbors are the sources with a non-zero retained
// weight.
class ComorbidityGraph {
 public:
  // Neighbor lists are derived from the non-zero entries of each column.
  ComorbidityGraph(std::vector<std::string> classes, std::size_t k, Matrix adjacency);
  // Explicit neighbor storage order; each list must be a permutation of the
  // non-zero sources of that column.
  ComorbidityGraph(std::vector<std::string> classes, std::size_t k, Matrix adjacency,
                   std::vector<std::vector<std::size_t>> in_neighbors);

  std::size_t size() const { return classes_.size(); }
  std::size_t k() const { return k_; }
  const std::vector<std::string>& classes() const { return classes_; }
  const Matrix& adjacency() const { return adjacency_; }
  double weight(std::size_t source, std::size_t target) const {
    return adjacency_(source, target);
  }
  const std::vector<std::size_t>& in_neighbors(std::size_t target) const {
    return in_neighbors_[target];
  }

  // Same graph with vertex v renamed to perm[v].
  ComorbidityGraph relabeled(std::span<const std::size_t> perm) const;

  friend bool operator==(const ComorbidityGraph&, const ComorbidityGraph&) = default;

 private:
  void validate() const;

  std::vector<std::string> classes_;
  std::size_t k_ = 0;
  Matrix adjacency_;
  std::vector<std::vector<std::size_t>> in_neighbors_;
};

// Kappa adjacency with self loops removed, pruned to the k strongest
// (largest |a_ji|) incoming edges per target. Equal magnitudes keep the
// lower source index.
ComorbidityGraph build_graph(const LabelMatrix& labels, std::size_t k);

nlohmann::json graph_to_json(const ComorbidityGraph& g);
ComorbidityGraph graph_from_json(const nlohmann::json& j);
// Hash of the canonical JSON text; checkpoints use it to pin their graph.
std::string graph_hash(const ComorbidityGraph& g);

void export_graph(const ComorbidityGraph& g, const std::filesystem::path& path);
ComorbidityGraph import_graph(const std::filesystem::path& path);

}  // namespace gnnfuse
