#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/io.hpp"

namespace gnnfuse {

PredictionTensor::PredictionTensor(std::vector<std::string> classes,
                                   std::vector<std::string> sample_ids,
                                   std::vector<std::string> model_ids, std::vector<double> scores)
    : classes_(std::move(classes)),
      sample_ids_(std::move(sample_ids)),
      model_ids_(std::move(model_ids)),
      scores_(std::move(scores)) {
  if (classes_.empty()) throw ValidationError("predictions: no classes");
  if (model_ids_.empty()) throw ValidationError("predictions: no models");
  if (scores_.size() != this->samples() * this->models() * this->classes()) {
    throw ShapeError("predictions: score count does not match samples x models x classes");
  }
  for (std::size_t i = 0; i < scores_.size(); ++i) {
    const double v = scores_[i];
    if (!(v >= 0.0 && v <= 1.0)) {
      const std::size_t c = i % this->classes();
      const std::size_t m = (i / this->classes()) % this->models();
      const std::size_t s = i / (this->classes() * this->models());
      throw ValidationError("predictions: score " + io::format_double(v) + " outside [0, 1] at sample " +
                            sample_ids_[s] + ", model " + model_ids_[m] + ", class " + classes_[c]);
    }
  }
}

PredictionTensor PredictionTensor::slice(std::size_t begin, std::size_t end) const {
  if (begin >= end || end > samples()) throw ValidationError("predictions: bad slice range");
  const std::size_t stride = models() * classes();
  return PredictionTensor(
      classes_,
      std::vector<std::string>(sample_ids_.begin() + static_cast<std::ptrdiff_t>(begin),
                               sample_ids_.begin() + static_cast<std::ptrdiff_t>(end)),
      model_ids_,
      std::vector<double>(scores_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                          scores_.begin() + static_cast<std::ptrdiff_t>(end * stride)));
}

PredictionTensor PredictionTensor::with_model_order(std::span<const std::size_t> order) const {
  if (order.size() != models()) throw ValidationError("predictions: model order size mismatch");
  std::vector<std::string> ids;
  for (std::size_t m : order) {
    if (m >= models()) throw ValidationError("predictions: model index out of range");
    ids.push_back(model_ids_[m]);
  }
  std::vector<double> scores(scores_.size());
  for (std::size_t s = 0; s < samples(); ++s)
    for (std::size_t m = 0; m < models(); ++m)
      for (std::size_t c = 0; c < classes(); ++c)
        scores[(s * models() + m) * classes() + c] = score(s, order[m], c);
  return PredictionTensor(classes_, sample_ids_, std::move(ids), std::move(scores));
}

VertexFeatures assemble_features(const PredictionTensor& p, std::size_t sample) {
  if (sample >= p.samples()) {
    throw ValidationError("assemble_features: sample " + std::to_string(sample) +
                          " out of range (" + std::to_string(p.samples()) + " samples)");
  }
  VertexFeatures f{Matrix(p.classes(), p.models())};
  for (std::size_t n = 0; n < p.models(); ++n)
    for (std::size_t i = 0; i < p.classes(); ++i) f.values(i, n) = p.score(sample, n, i);
  return f;
}

Matrix features_to_scores(const VertexFeatures& f) { return transpose(f.values); }

ScoreMatrix average_ensemble(const PredictionTensor& p) {
  ScoreMatrix out{p.class_names(), p.sample_ids(), Matrix(p.samples(), p.classes())};
  std::vector<double> column(p.models());
  for (std::size_t s = 0; s < p.samples(); ++s) {
    for (std::size_t c = 0; c < p.classes(); ++c) {
      for (std::size_t n = 0; n < p.models(); ++n) column[n] = p.score(s, n, c);
      std::sort(column.begin(), column.end());
      double sum = 0.0, carry = 0.0;
      for (double v : column) {
        const double y = v - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
      }
      // The mean cannot leave [min, max]; the clamp only absorbs rounding.
      out.values(s, c) =
          std::clamp(sum / static_cast<double>(column.size()), column.front(), column.back());
    }
  }
  return out;
}

void require_same_classes(const std::vector<std::string>& a, std::string_view a_name,
                          const std::vector<std::string>& b, std::string_view b_name) {
  if (a == b) return;
  auto join = [](const std::vector<std::string>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i];
    return s + "]";
  };
  throw ValidationError("class lists differ: " + std::string(a_name) + " has " + join(a) + ", " +
                        std::string(b_name) + " has " + join(b));
}

PredictionTensor load_predictions(const std::filesystem::path& path) {
  const io::CsvTable t = io::read_csv(path);
  if (t.header.size() < 3 || t.header[0] != "sample_id" || t.header[1] != "model_id") {
    throw ValidationError(path.string() +
                          ": predictions header must be sample_id,model_id,<classes...>");
  }
  std::vector<std::string> classes(t.header.begin() + 2, t.header.end());
  const std::size_t c = classes.size();

  std::vector<std::string> sample_ids;
  std::vector<std::string> model_ids;
  std::map<std::string, std::size_t> model_index;
  std::map<std::string, std::size_t> sample_index;
  // Scores keyed by (sample, model) position; filled in file order.
  std::vector<std::vector<std::vector<double>>> rows;

  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string where = path.string() + ":" + std::to_string(t.lines[r]);
    auto [mit, new_model] = model_index.try_emplace(row[1], model_ids.size());
    if (new_model) model_ids.push_back(row[1]);
    auto [sit, new_sample] = sample_index.try_emplace(row[0], sample_ids.size());
    if (new_sample) {
      sample_ids.push_back(row[0]);
      rows.emplace_back();
    }
    auto& per_model = rows[sit->second];
    if (per_model.size() < model_ids.size()) per_model.resize(model_ids.size());
    if (!per_model[mit->second].empty()) {
      throw ValidationError(where + ": duplicate row for sample '" + row[0] + "', model '" +
                            row[1] + "'");
    }
    std::vector<double> values(c);
    for (std::size_t i = 0; i < c; ++i) {
      const std::string cell = where + " column " + classes[i];
      values[i] = io::parse_double(row[i + 2], cell);
      if (!(values[i] >= 0.0 && values[i] <= 1.0)) {
        throw ValidationError(cell + ": score " + row[i + 2] + " outside [0, 1]");
      }
    }
    per_model[mit->second] = std::move(values);
  }
  if (sample_ids.empty()) throw ValidationError(path.string() + ": no prediction rows");

  std::vector<double> scores;
  scores.reserve(sample_ids.size() * model_ids.size() * c);
  for (std::size_t s = 0; s < sample_ids.size(); ++s) {
    auto& per_model = rows[s];
    per_model.resize(model_ids.size());
    for (std::size_t m = 0; m < model_ids.size(); ++m) {
      if (per_model[m].empty()) {
        throw ValidationError(path.string() + ": sample '" + sample_ids[s] +
                              "' has no row for model '" + model_ids[m] + "'");
      }
      scores.insert(scores.end(), per_model[m].begin(), per_model[m].end());
    }
  }
  return PredictionTensor(std::move(classes), std::move(sample_ids), std::move(model_ids),
                          std::move(scores));
}

void save_predictions(const PredictionTensor& p, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "sample_id,model_id";
  for (const auto& c : p.class_names()) out << ',' << c;
  out << '\n';
  for (std::size_t s = 0; s < p.samples(); ++s) {
    for (std::size_t m = 0; m < p.models(); ++m) {
      out << p.sample_ids()[s] << ',' << p.model_ids()[m];
      for (std::size_t c = 0; c < p.classes(); ++c) out << ',' << io::format_double(p.score(s, m, c));
      out << '\n';
    }
  }
  io::write_text(path, out.str());
}

}  // namespace gnnfuse
