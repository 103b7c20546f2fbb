#include "gnnfuse/errors.hpp"
#include "gnnfuse/gnn.hpp"
#include "gnnfuse/io.hpp"

namespace gnnfuse {

namespace {

constexpr const char* kFormat = "gnnfuse-model";
constexpr int kVersion = 1;

nlohmann::json matrix_json(const Matrix& m) {
  if (m.cols() == 1) return std::vector<double>(m.values().begin(), m.values().end());
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

// Reads `j` into `p`, which already has the expected shape.
void read_matrix(const nlohmann::json& j, Parameter& p) {
  Matrix& m = p.value;
  std::vector<double> data;
  if (m.cols() == 1 && !(j.is_array() && !j.empty() && j.front().is_array())) {
    data = j.get<std::vector<double>>();
  } else {
    if (!j.is_array() || j.size() != m.rows()) {
      throw ValidationError("checkpoint: " + p.name + " should have " + std::to_string(m.rows()) +
                            " rows");
    }
    for (const auto& row : j) {
      auto values = row.get<std::vector<double>>();
      if (values.size() != m.cols()) {
        throw ValidationError("checkpoint: " + p.name + " should have " +
                              std::to_string(m.cols()) + " columns");
      }
      data.insert(data.end(), values.begin(), values.end());
    }
  }
  if (data.size() != m.size()) {
    throw ValidationError("checkpoint: " + p.name + " should have " + std::to_string(m.size()) +
                          " entries, found " + std::to_string(data.size()));
  }
  m = Matrix(m.rows(), m.cols(), std::move(data));
  if (!m.all_finite()) throw ValidationError("checkpoint: non-finite value in " + p.name);
  p.grad = Matrix(m.rows(), m.cols());
}

}  // namespace

nlohmann::json model_to_json(const GnnModel& model) {
  nlohmann::json layers = nlohmann::json::array();
  for (const GnnLayer& l : model.layers()) {
    layers.push_back({
        {"weight", matrix_json(l.weight.value)},
        {"bias", matrix_json(l.bias.value)},
        {"edge_mlp",
         {{"hidden", l.edge_mlp.hidden},
          {"w1", matrix_json(l.edge_mlp.w1.value)},
          {"b1", matrix_json(l.edge_mlp.b1.value)},
          {"w2", matrix_json(l.edge_mlp.w2.value)},
          {"b2", matrix_json(l.edge_mlp.b2.value)}}},
    });
  }
  return {
      {"format", kFormat},
      {"version", kVersion},
      {"classes", model.graph().classes()},
      {"schedule", model.schedule().dims()},
      {"graph_hash", graph_hash(model.graph())},
      {"graph", graph_to_json(model.graph())},
      {"layers", std::move(layers)},
  };
}

GnnModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kFormat) {
      throw ValidationError("checkpoint: not a gnnfuse model file");
    }
    if (j.at("version").get<int>() != kVersion) {
      throw ValidationError("checkpoint: unsupported version");
    }
    ComorbidityGraph graph = graph_from_json(j.at("graph"));
    if (graph_hash(graph) != j.at("graph_hash").get<std::string>()) {
      throw ValidationError("checkpoint: embedded graph does not match its hash");
    }
    require_same_classes(j.at("classes").get<std::vector<std::string>>(), "checkpoint",
                         graph.classes(), "checkpoint graph");
    DimensionSchedule schedule(j.at("schedule").get<std::vector<std::size_t>>());
    GnnModel model(std::move(schedule), std::move(graph));

    const auto& layers = j.at("layers");
    if (!layers.is_array() || layers.size() != model.layers().size()) {
      throw ValidationError("checkpoint: layer count does not match the schedule");
    }
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto& lj = layers[l];
      GnnLayer& layer = model.layers()[l];
      const auto& ej = lj.at("edge_mlp");
      if (ej.at("hidden").get<std::size_t>() != layer.edge_mlp.hidden) {
        throw ValidationError("checkpoint: edge MLP width of layer " + std::to_string(l + 1) +
                              " does not match the schedule");
      }
      read_matrix(lj.at("weight"), layer.weight);
      read_matrix(lj.at("bias"), layer.bias);
      read_matrix(ej.at("w1"), layer.edge_mlp.w1);
      read_matrix(ej.at("b1"), layer.edge_mlp.b1);
      read_matrix(ej.at("w2"), layer.edge_mlp.w2);
      read_matrix(ej.at("b2"), layer.edge_mlp.b2);
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
}

void save_model(const GnnModel& model, const std::filesystem::path& path) {
  io::write_text(path, model_to_json(model).dump() + "\n");
}

GnnModel load_model(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

GnnModel load_model(const std::filesystem::path& path, const ComorbidityGraph& graph) {
  GnnModel model = load_model(path);
  if (model.vertices() != graph.size()) {
    throw ValidationError("checkpoint has " + std::to_string(model.vertices()) +
                          " classes, graph has " + std::to_string(graph.size()));
  }
  require_same_classes(model.graph().classes(), "checkpoint", graph.classes(), "graph");
  if (graph_hash(model.graph()) != graph_hash(graph)) {
    throw ValidationError("checkpoint was trained on a different graph");
  }
  return model;
}

}  // namespace gnnfuse
