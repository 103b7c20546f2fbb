#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gnnfuse/graph.hpp"
#include "gnnfuse/matrix.hpp"

namespace gnnfuse {

// Scores s[sample][model][class] in [0, 1] from an ensemble of N models.
// model_ids carry provenance (fold, snapshot, crop) as opaque tags.
class PredictionTensor {
 public:
  PredictionTensor(std::vector<std::string> classes, std::vector<std::string> sample_ids,
                   std::vector<std::string> model_ids, std::vector<double> scores);

  std::size_t samples() const { return sample_ids_.size(); }
  std::size_t models() const { return model_ids_.size(); }
  std::size_t classes() const { return classes_.size(); }
  const std::vector<std::string>& class_names() const { return classes_; }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  const std::vector<std::string>& model_ids() const { return model_ids_; }

  double score(std::size_t sample, std::size_t model, std::size_t cls) const {
    return scores_[(sample * models() + model) * classes() + cls];
  }
  std::span<const double> raw() const { return scores_; }

  PredictionTensor slice(std::size_t begin, std::size_t end) const;
  // Reorders the model axis: model m of the result is model order[m] here.
  PredictionTensor with_model_order(std::span<const std::size_t> order) const;

  friend bool operator==(const PredictionTensor&, const PredictionTensor&) = default;

 private:
  std::vector<std::string> classes_;
  std::vector<std::string> sample_ids_;
  std::vector<std::string> model_ids_;
  std::vector<double> scores_;
};

// Input features of one sample: row i is f_i, the N ensemble scores for
// class i.
struct VertexFeatures {
  Matrix values;  // C x N

  std::size_t vertices() const { return values.rows(); }
  std::size_t width() const { return values.cols(); }
};

VertexFeatures assemble_features(const PredictionTensor& p, std::size_t sample);
// Inverse of assemble_features: the (model x class) score slice.
Matrix features_to_scores(const VertexFeatures& f);

// Per-sample class scores, e.g. fused or averaged ensemble output.
struct ScoreMatrix {
  std::vector<std::string> classes;
  std::vector<std::string> sample_ids;
  Matrix values;  // samples x classes
};

// Mean over the model axis. Values are summed in sorted order with Kahan
// compensation, so the result is independent of model order.
ScoreMatrix average_ensemble(const PredictionTensor& p);

PredictionTensor load_predictions(const std::filesystem::path& path);
void save_predictions(const PredictionTensor& p, const std::filesystem::path& path);

// Entries 1, 0 and -1; uncertain (-1) is read as absent.
LabelMatrix load_labels(const std::filesystem::path& path);
void save_labels(const LabelMatrix& labels, const std::filesystem::path& path);

ScoreMatrix load_scores(const std::filesystem::path& path);
void save_scores(const ScoreMatrix& scores, const std::filesystem::path& path);

// Throws ValidationError naming both lists unless they are equal.
void require_same_classes(const std::vector<std::string>& a, std::string_view a_name,
                          const std::vector<std::string>& b, std::string_view b_name);

}  // namespace gnnfuse
