#include <cmath>
#include <map>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/gnn.hpp"
#include "gnnfuse/random.hpp"

namespace gnnfuse {

namespace {

// The edge MLP's hidden layer has floor(rows * cols / 2) units, at least one.
std::size_t hidden_units(std::size_t rows, std::size_t cols) {
  return std::max<std::size_t>(1, rows * cols / 2);
}

using LeafFn = Var (*)(Tape&, const Parameter&);

Var record_leaf(Tape& tape, const Parameter& p) {
  // Only reached from the mutable entry points; see forward_impl.
  return tape.param(const_cast<Parameter&>(p));
}

Var constant_leaf(Tape& tape, const Parameter& p) { return tape.constant(p.value); }

Var edge_matrix(Tape& tape, const EdgeMlp& mlp, double a, LeafFn leaf) {
  Var input = tape.constant(Matrix(1, 1, a));
  Var hidden = tape.relu(tape.add_bias(tape.matmul(leaf(tape, mlp.w1), input), leaf(tape, mlp.b1)));
  Var flat = tape.add_bias(tape.matmul(leaf(tape, mlp.w2), hidden), leaf(tape, mlp.b2));
  return tape.tanh(tape.reshape(flat, mlp.rows, mlp.cols));
}

std::vector<Var> message_pass_impl(Tape& tape, const GnnLayer& layer,
                                   const ComorbidityGraph& graph, std::span<const Var> features,
                                   LeafFn leaf) {
  const std::size_t c = graph.size();
  if (features.size() != c) {
    throw ShapeError("message_pass: " + std::to_string(features.size()) +
                     " feature blocks for " + std::to_string(c) + " vertices");
  }
  const std::size_t in_width = layer.weight.value.cols();
  for (Var f : features) {
    if (tape.value(f).rows() != in_width) {
      throw ShapeError("message_pass: feature width " + std::to_string(tape.value(f).rows()) +
                       " does not match layer input width " + std::to_string(in_width));
    }
  }

  Var weight = leaf(tape, layer.weight);
  Var bias = leaf(tape, layer.bias);
  // h^l depends only on the edge weight; equal weights share one matrix.
  std::map<double, Var> edge_cache;
  auto edge = [&](double a) {
    auto it = edge_cache.find(a);
    if (it == edge_cache.end()) it = edge_cache.emplace(a, edge_matrix(tape, layer.edge_mlp, a, leaf)).first;
    return it->second;
  };

  std::vector<Var> out;
  out.reserve(c);
  for (std::size_t i = 0; i < c; ++i) {
    Var pre = tape.matmul(weight, features[i]);
    const auto& neighbors = graph.in_neighbors(i);
    if (!neighbors.empty()) {
      Var agg;
      for (std::size_t j : neighbors) {
        Var msg = tape.matmul(edge(graph.weight(j, i)), features[j]);
        agg = agg.valid() ? tape.add(agg, msg) : msg;
      }
      pre = tape.add(pre, tape.scale(agg, 1.0 / static_cast<double>(neighbors.size())));
    }
    pre = tape.add_bias(pre, bias);
    out.push_back(layer.activation == Activation::Relu ? tape.relu(pre) : tape.sigmoid(pre));
  }
  return out;
}

Var forward_impl(Tape& tape, const GnnModel& model, std::span<const VertexFeatures> batch,
                 LeafFn leaf) {
  std::vector<Var> features = input_features(tape, batch);
  if (features.size() != model.vertices()) {
    throw ShapeError("forward: features have " + std::to_string(features.size()) +
                     " vertices, model has " + std::to_string(model.vertices()));
  }
  if (tape.value(features.front()).rows() != model.schedule().input_width()) {
    throw ShapeError("forward: " + std::to_string(tape.value(features.front()).rows()) +
                     " ensemble scores per vertex, model expects " +
                     std::to_string(model.schedule().input_width()));
  }
  for (const GnnLayer& layer : model.layers())
    features = message_pass_impl(tape, layer, model.graph(), features, leaf);
  return tape.concat_rows(features);
}

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (double& v : m.values()) v = rng.uniform(-bound, bound);
}

}  // namespace

EdgeMlp::EdgeMlp(std::size_t r, std::size_t c, const std::string& prefix)
    : rows(r),
      cols(c),
      hidden(hidden_units(r, c)),
      w1(prefix + ".w1", Matrix(hidden, 1)),
      b1(prefix + ".b1", Matrix(hidden, 1)),
      w2(prefix + ".w2", Matrix(r * c, hidden)),
      b2(prefix + ".b2", Matrix(r * c, 1)) {}

Matrix edge_weight_matrix(const EdgeMlp& mlp, double edge_weight) {
  if (!std::isfinite(edge_weight)) throw ValidationError("edge weight must be finite");
  Tape tape;
  return tape.value(edge_matrix(tape, mlp, edge_weight, constant_leaf));
}

GnnModel::GnnModel(DimensionSchedule schedule, ComorbidityGraph graph)
    : schedule_(std::move(schedule)), graph_(std::move(graph)) {
  const std::size_t l_count = schedule_.layers();
  layers_.reserve(l_count);
  for (std::size_t l = 1; l <= l_count; ++l) {
    const std::size_t out = schedule_.width(l), in = schedule_.width(l - 1);
    const std::string prefix = "layer" + std::to_string(l);
    GnnLayer layer;
    layer.weight = Parameter(prefix + ".W", Matrix(out, in));
    layer.bias = Parameter(prefix + ".b", Matrix(out, 1));
    layer.edge_mlp = EdgeMlp(out, in, prefix + ".h");
    layer.activation = l == l_count ? Activation::Sigmoid : Activation::Relu;
    layers_.push_back(std::move(layer));
  }
}

std::vector<Parameter*> GnnModel::parameters() {
  std::vector<Parameter*> out;
  for (GnnLayer& l : layers_) {
    for (Parameter* p : {&l.weight, &l.bias, &l.edge_mlp.w1, &l.edge_mlp.b1, &l.edge_mlp.w2,
                         &l.edge_mlp.b2})
      out.push_back(p);
  }
  return out;
}

std::vector<const Parameter*> GnnModel::parameters() const {
  std::vector<const Parameter*> out;
  for (const GnnLayer& l : layers_) {
    for (const Parameter* p : {&l.weight, &l.bias, &l.edge_mlp.w1, &l.edge_mlp.b1,
                               &l.edge_mlp.w2, &l.edge_mlp.b2})
      out.push_back(p);
  }
  return out;
}

std::size_t GnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : parameters()) n += p->value.size();
  return n;
}

GnnModel init_model(DimensionSchedule schedule, ComorbidityGraph graph, std::uint64_t seed) {
  GnnModel model(std::move(schedule), std::move(graph));
  Rng rng(seed, 0x6e6e);
  for (GnnLayer& layer : model.layers()) {
    fill_uniform(layer.weight.value, std::sqrt(1.0 / static_cast<double>(layer.weight.value.cols())), rng);
    fill_uniform(layer.edge_mlp.w1.value, 1.0, rng);
    fill_uniform(layer.edge_mlp.w2.value,
                 std::sqrt(1.0 / static_cast<double>(layer.edge_mlp.hidden)), rng);
  }
  return model;
}

std::vector<Var> message_pass(Tape& tape, GnnLayer& layer, const ComorbidityGraph& graph,
                              std::span<const Var> features) {
  return message_pass_impl(tape, layer, graph, features, record_leaf);
}

std::vector<Var> input_features(Tape& tape, std::span<const VertexFeatures> batch) {
  if (batch.empty()) throw ShapeError("forward: empty batch");
  const std::size_t c = batch.front().vertices();
  const std::size_t n = batch.front().width();
  std::vector<Var> out;
  out.reserve(c);
  for (std::size_t i = 0; i < c; ++i) {
    Matrix block(n, batch.size());
    for (std::size_t b = 0; b < batch.size(); ++b) {
      const Matrix& f = batch[b].values;
      if (f.rows() != c || f.cols() != n) throw ShapeError("forward: ragged batch");
      for (std::size_t k = 0; k < n; ++k) block(k, b) = f(i, k);
    }
    out.push_back(tape.constant(std::move(block)));
  }
  return out;
}

Var forward(Tape& tape, GnnModel& model, std::span<const VertexFeatures> batch) {
  return forward_impl(tape, model, batch, record_leaf);
}

Matrix forward(const GnnModel& model, std::span<const VertexFeatures> batch) {
  Tape tape;
  return tape.value(forward_impl(tape, model, batch, constant_leaf));
}

std::vector<double> forward(const GnnModel& model, const VertexFeatures& features) {
  const Matrix out = forward(model, std::span<const VertexFeatures>(&features, 1));
  return {out.values().begin(), out.values().end()};
}

ScoreMatrix fuse(const GnnModel& model, const PredictionTensor& p) {
  require_same_classes(model.graph().classes(), "model", p.class_names(), "predictions");
  if (p.models() != model.schedule().input_width()) {
    throw ValidationError("predictions have " + std::to_string(p.models()) +
                          " models per sample, model expects " +
                          std::to_string(model.schedule().input_width()));
  }
  constexpr std::size_t kChunk = 256;
  ScoreMatrix out{p.class_names(), p.sample_ids(), Matrix(p.samples(), p.classes())};
  std::vector<VertexFeatures> batch;
  for (std::size_t start = 0; start < p.samples(); start += kChunk) {
    const std::size_t end = std::min(p.samples(), start + kChunk);
    batch.clear();
    for (std::size_t s = start; s < end; ++s) batch.push_back(assemble_features(p, s));
    const Matrix probs = forward(model, batch);
    for (std::size_t s = start; s < end; ++s)
      for (std::size_t c = 0; c < p.classes(); ++c) out.values(s, c) = probs(c, s - start);
  }
  return out;
}

}  // namespace gnnfuse
