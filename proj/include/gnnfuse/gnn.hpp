#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/tape.hpp"
#include "json.hpp"

namespace gnnfuse {

// Layer widths d_0..d_L. d_0 is the ensemble size, d_L = 1, and every
// width between the second and the last grows as floor(1.3 * previous).
class DimensionSchedule {
 public:
  explicit DimensionSchedule(std::vector<std::size_t> dims);
  static DimensionSchedule make(std::size_t inputs, std::size_t first_width, std::size_t layers);

  std::size_t layers() const { return dims_.size() - 1; }
  std::size_t input_width() const { return dims_.front(); }
  std::size_t width(std::size_t l) const { return dims_.at(l); }
  const std::vector<std::size_t>& dims() const { return dims_; }

  friend bool operator==(const DimensionSchedule&, const DimensionSchedule&) = default;

 private:
  std::vector<std::size_t> dims_;
};

// Published per-backbone hyperparameters of the fusion network.
struct ArchitecturePreset {
  std::string_view name;
  std::size_t layers;
  std::size_t k;
  std::size_t inputs;
  std::size_t first_width;
};

std::span<const ArchitecturePreset> architecture_presets();
const ArchitecturePreset& architecture_preset(std::string_view name);

enum class Activation { Relu, Sigmoid };

// h^l: scalar edge weight -> (rows x cols) matrix,
// reshape_rowmajor(w2 * relu(w1 * a + b1) + b2) followed by tanh.
struct EdgeMlp {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t hidden = 0;
  Parameter w1;  // hidden x 1
  Parameter b1;  // hidden x 1
  Parameter w2;  // rows*cols x hidden
  Parameter b2;  // rows*cols x 1

  EdgeMlp() = default;
  EdgeMlp(std::size_t rows, std::size_t cols, const std::string& prefix);
};

Matrix edge_weight_matrix(const EdgeMlp& mlp, double edge_weight);

struct GnnLayer {
  Parameter weight;  // d_l x d_{l-1}
  Parameter bias;    // d_l x 1
  EdgeMlp edge_mlp;
  Activation activation = Activation::Relu;
};

class GnnModel {
 public:
  // All parameters zero.
  GnnModel(DimensionSchedule schedule, ComorbidityGraph graph);

  const DimensionSchedule& schedule() const { return schedule_; }
  const ComorbidityGraph& graph() const { return graph_; }
  std::size_t vertices() const { return graph_.size(); }
  std::vector<GnnLayer>& layers() { return layers_; }
  const std::vector<GnnLayer>& layers() const { return layers_; }

  // Stable order: per layer W, b, then h^l's w1, b1, w2, b2.
  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t parameter_count() const;

 private:
  DimensionSchedule schedule_;
  ComorbidityGraph graph_;
  std::vector<GnnLayer> layers_;
};

// Weights and both h^l affine maps uniform in +-sqrt(1/fan_in), biases zero.
GnnModel init_model(DimensionSchedule schedule, ComorbidityGraph graph, std::uint64_t seed);

// One message-passing step on a batch; features[i] is d_{l-1} x B for
// vertex i, the result is d_l x B per vertex:
//   f_i' = g(W f_i + (1/|N_i|) sum_{j in N_i} h(a_ji) f_j + b)
// with an empty aggregation when N_i is empty. Parameters are registered on
// the tape.
std::vector<Var> message_pass(Tape& tape, GnnLayer& layer, const ComorbidityGraph& graph,
                              std::span<const Var> features);

// Per-vertex input blocks (d_0 x B) for a batch of samples.
std::vector<Var> input_features(Tape& tape, std::span<const VertexFeatures> batch);

// Differentiable forward over a batch; returns C x B probabilities.
Var forward(Tape& tape, GnnModel& model, std::span<const VertexFeatures> batch);

// Inference. Column b of the result is sample b; a column does not depend
// on the rest of the batch.
Matrix forward(const GnnModel& model, std::span<const VertexFeatures> batch);
std::vector<double> forward(const GnnModel& model, const VertexFeatures& features);

// Fused scores for every sample of `p`.
ScoreMatrix fuse(const GnnModel& model, const PredictionTensor& p);

nlohmann::json model_to_json(const GnnModel& model);
GnnModel model_from_json(const nlohmann::json& j);
void save_model(const GnnModel& model, const std::filesystem::path& path);
GnnModel load_model(const std::filesystem::path& path);
// Also rejects a checkpoint whose graph differs from `graph`.
GnnModel load_model(const std::filesystem::path& path, const ComorbidityGraph& graph);

}  // namespace gnnfuse
