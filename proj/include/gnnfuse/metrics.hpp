#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/graph.hpp"
#include "json.hpp"

namespace gnnfuse {

// A sample is called positive when its score is strictly above `threshold`.
struct OperatingPoint {
  double threshold = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;

  double youden() const { return sensitivity + specificity - 1.0; }
};

// ROC sampled at every distinct decision: thresholds ascend from -inf
// through the midpoints between consecutive distinct scores to +inf.
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> sensitivity;
  std::vector<double> specificity;
  double auc = 0.0;
};

// Mann-Whitney AUC: the fraction of (positive, negative) pairs ranked
// correctly, ties counting one half. Needs both label values present.
double auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

// Operating point maximising Youden's J = sensitivity + specificity - 1 over the ROC
// thresholds. Ties prefer higher specificity, then the lower threshold.
OperatingPoint youden_point(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct ClassReport {
  std::string name;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  // Classes lacking positives or negatives are not scored.
  bool skipped = false;
  double auc = 0.0;
  OperatingPoint point;
  RocCurve roc;
};

struct EvalReport {
  std::vector<ClassReport> classes;
  std::vector<std::string> skipped;
  // Means over the non-skipped classes; NaN when every class is skipped.
  double macro_auc = 0.0;
  double macro_sensitivity = 0.0;
  double macro_specificity = 0.0;
};

// Scores and labels are matched by sample id; class lists must agree.
EvalReport evaluate(const ScoreMatrix& scores, const LabelMatrix& labels);

// Reorders `labels` to follow `sample_ids`. Throws when an id is missing.
LabelMatrix align_labels(const LabelMatrix& labels, const std::vector<std::string>& sample_ids);

nlohmann::json report_to_json(const EvalReport& report, bool include_roc = true);
// Grid with one column per class plus "Avg.", rows AUC / Sens. / Spec.
std::string report_table(const EvalReport& report);
// class,auc,sensitivity,specificity,threshold,skipped
std::string report_csv(const EvalReport& report);

}  // namespace gnnfuse
