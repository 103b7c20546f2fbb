#pragma once

// Seeded random instances shared by the unit suites and the acceptance run.

#include <string>
#include <vector>

#include "gnnfuse/gnn.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/random.hpp"

namespace fixture {

inline std::vector<std::string> names(const char* prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Columns partly copy (or flip) their predecessor so kappa spreads over [-1, 1].
inline gnnfuse::LabelMatrix correlated_labels(gnnfuse::Rng& rng, std::size_t samples,
                                              std::size_t classes) {
  std::vector<std::uint8_t> v(samples * classes);
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t c = 0; c < classes; ++c) {
      const double u = rng.uniform();
      std::uint8_t bit = rng.uniform() < 0.35 ? 1 : 0;
      if (c > 0 && u < 0.35) bit = v[s * classes + c - 1];
      else if (c > 0 && u < 0.55) bit = 1 - v[s * classes + c - 1];
      v[s * classes + c] = bit;
    }
  }
  return gnnfuse::LabelMatrix(names("d", classes), names("s", samples), v);
}

inline gnnfuse::ComorbidityGraph random_graph(gnnfuse::Rng& rng, std::size_t classes, std::size_t k) {
  return gnnfuse::build_graph(correlated_labels(rng, 150, classes), k);
}

inline void randomize(gnnfuse::Matrix& m, gnnfuse::Rng& rng, double scale) {
  for (double& v : m.values()) v = rng.uniform(-scale, scale);
}

// Fan-in initialised weights plus non-zero biases so every term matters.
inline gnnfuse::GnnModel random_model(gnnfuse::Rng& rng, const gnnfuse::ComorbidityGraph& graph,
                                      std::size_t inputs, std::size_t first_width,
                                      std::size_t layers, std::uint64_t seed) {
  gnnfuse::GnnModel model = gnnfuse::init_model(
      gnnfuse::DimensionSchedule::make(inputs, first_width, layers), graph, seed);
  for (auto& layer : model.layers()) {
    randomize(layer.bias.value, rng, 0.3);
    randomize(layer.edge_mlp.b1.value, rng, 0.3);
    randomize(layer.edge_mlp.b2.value, rng, 0.3);
  }
  return model;
}

inline gnnfuse::VertexFeatures random_features(gnnfuse::Rng& rng, std::size_t classes,
                                               std::size_t inputs) {
  gnnfuse::Matrix m(classes, inputs);
  for (double& v : m.values()) v = rng.uniform();
  return {m};
}

inline std::vector<std::vector<double>> rows_of(const gnnfuse::VertexFeatures& f) {
  std::vector<std::vector<double>> out(f.values.rows());
  for (std::size_t i = 0; i < f.values.rows(); ++i)
    for (std::size_t q = 0; q < f.values.cols(); ++q) out[i].push_back(f.values(i, q));
  return out;
}

}  // namespace fixture
