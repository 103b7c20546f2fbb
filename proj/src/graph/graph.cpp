#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/io.hpp"

namespace gnnfuse {

namespace {

std::vector<std::vector<std::size_t>> nonzero_sources(const Matrix& adjacency) {
  std::vector<std::vector<std::size_t>> out(adjacency.cols());
  for (std::size_t i = 0; i < adjacency.cols(); ++i)
    for (std::size_t j = 0; j < adjacency.rows(); ++j)
      if (adjacency(j, i) != 0.0) out[i].push_back(j);
  return out;
}

}  // namespace

ComorbidityGraph::ComorbidityGraph(std::vector<std::string> classes, std::size_t k,
                                   Matrix adjacency)
    : classes_(std::move(classes)), k_(k), adjacency_(std::move(adjacency)) {
  in_neighbors_ = nonzero_sources(adjacency_);
  validate();
}

ComorbidityGraph::ComorbidityGraph(std::vector<std::string> classes, std::size_t k,
                                   Matrix adjacency,
                                   std::vector<std::vector<std::size_t>> in_neighbors)
    : classes_(std::move(classes)),
      k_(k),
      adjacency_(std::move(adjacency)),
      in_neighbors_(std::move(in_neighbors)) {
  validate();
  const auto expected = nonzero_sources(adjacency_);
  if (in_neighbors_.size() != expected.size()) {
    throw ValidationError("graph: neighbor list count does not match vertex count");
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    auto sorted = in_neighbors_[i];
    std::sort(sorted.begin(), sorted.end());
    if (sorted != expected[i]) {
      throw ValidationError("graph: neighbor list of vertex " + std::to_string(i) +
                            " does not match the adjacency");
    }
  }
}

void ComorbidityGraph::validate() const {
  const std::size_t c = classes_.size();
  if (c < 2) throw ValidationError("graph: need at least 2 classes");
  if (std::set<std::string>(classes_.begin(), classes_.end()).size() != c) {
    throw ValidationError("graph: duplicate class names");
  }
  if (k_ < 1 || k_ > c - 1) {
    throw ValidationError("graph: k=" + std::to_string(k_) + " outside [1, " +
                          std::to_string(c - 1) + "]");
  }
  if (adjacency_.rows() != c || adjacency_.cols() != c) {
    throw ValidationError("graph: adjacency " + adjacency_.shape_string() + " does not match " +
                          std::to_string(c) + " classes");
  }
  for (std::size_t j = 0; j < c; ++j) {
    for (std::size_t i = 0; i < c; ++i) {
      const double a = adjacency_(j, i);
      if (!std::isfinite(a) || std::abs(a) > 1.0) {
        throw ValidationError("graph: weight a[" + std::to_string(j) + "][" + std::to_string(i) +
                              "] outside [-1, 1]");
      }
    }
    if (adjacency_(j, j) != 0.0) {
      throw ValidationError("graph: self loop on vertex " + std::to_string(j));
    }
  }
  for (std::size_t i = 0; i < c; ++i) {
    std::size_t degree = 0;
    for (std::size_t j = 0; j < c; ++j) degree += adjacency_(j, i) != 0.0;
    if (degree > k_) {
      throw ValidationError("graph: vertex " + std::to_string(i) + " has " +
                            std::to_string(degree) + " in-neighbors, more than k=" +
                            std::to_string(k_));
    }
  }
}

ComorbidityGraph ComorbidityGraph::relabeled(std::span<const std::size_t> perm) const {
  const std::size_t c = size();
  if (perm.size() != c) throw ValidationError("relabel: permutation size mismatch");
  std::vector<bool> seen(c, false);
  for (std::size_t v : perm) {
    if (v >= c || seen[v]) throw ValidationError("relabel: not a permutation");
    seen[v] = true;
  }
  std::vector<std::string> classes(c);
  Matrix adjacency(c, c);
  std::vector<std::vector<std::size_t>> neighbors(c);
  for (std::size_t v = 0; v < c; ++v) {
    classes[perm[v]] = classes_[v];
    for (std::size_t u = 0; u < c; ++u) adjacency(perm[u], perm[v]) = adjacency_(u, v);
    for (std::size_t src : in_neighbors_[v]) neighbors[perm[v]].push_back(perm[src]);
  }
  return ComorbidityGraph(std::move(classes), k_, std::move(adjacency), std::move(neighbors));
}

ComorbidityGraph build_graph(const LabelMatrix& labels, std::size_t k) {
  const std::size_t c = labels.classes();
  if (k < 1 || k > c - 1) {
    throw ValidationError("build_graph: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(c - 1) + "]");
  }
  const Matrix kappa = kappa_matrix(labels);
  Matrix pruned(c, c);
  std::vector<std::size_t> sources;
  for (std::size_t target = 0; target < c; ++target) {
    sources.clear();
    for (std::size_t j = 0; j < c; ++j)
      if (j != target) sources.push_back(j);
    std::stable_sort(sources.begin(), sources.end(), [&](std::size_t a, std::size_t b) {
      return std::abs(kappa(a, target)) > std::abs(kappa(b, target));
    });
    for (std::size_t r = 0; r < k; ++r) pruned(sources[r], target) = kappa(sources[r], target);
  }
  return ComorbidityGraph(labels.class_names(), k, std::move(pruned));
}

nlohmann::json graph_to_json(const ComorbidityGraph& g) {
  nlohmann::json adjacency = nlohmann::json::array();
  for (std::size_t r = 0; r < g.size(); ++r) {
    auto row = g.adjacency().row(r);
    adjacency.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"classes", g.classes()}, {"k", g.k()}, {"adjacency", std::move(adjacency)}};
}

ComorbidityGraph graph_from_json(const nlohmann::json& j) {
  try {
    auto classes = j.at("classes").get<std::vector<std::string>>();
    const auto k = j.at("k").get<std::size_t>();
    const auto& adj = j.at("adjacency");
    const std::size_t c = classes.size();
    if (!adj.is_array()) throw ValidationError("graph: adjacency must be an array");
    std::vector<double> data;
    if (!adj.empty() && adj.front().is_array()) {
      if (adj.size() != c) {
        throw ValidationError("graph: adjacency has " + std::to_string(adj.size()) +
                              " rows for " + std::to_string(c) + " classes");
      }
      for (const auto& row : adj) {
        auto values = row.get<std::vector<double>>();
        if (values.size() != c) throw ValidationError("graph: ragged adjacency row");
        data.insert(data.end(), values.begin(), values.end());
      }
    } else {
      data = adj.get<std::vector<double>>();
      if (data.size() != c * c) {
        throw ValidationError("graph: flat adjacency length does not equal C*C");
      }
    }
    return ComorbidityGraph(std::move(classes), k, Matrix(c, c, std::move(data)));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("graph: malformed JSON: ") + e.what());
  }
}

std::string graph_hash(const ComorbidityGraph& g) { return io::content_hash(graph_to_json(g).dump()); }

void export_graph(const ComorbidityGraph& g, const std::filesystem::path& path) {
  io::write_text(path, graph_to_json(g).dump(2) + "\n");
}

ComorbidityGraph import_graph(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return graph_from_json(j);
}

}  // namespace gnnfuse
