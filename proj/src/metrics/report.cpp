#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/io.hpp"
#include "gnnfuse/metrics.hpp"

namespace gnnfuse {

namespace {

nlohmann::json number_or_text(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return v > 0 ? "inf" : "-inf";
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

LabelMatrix align_labels(const LabelMatrix& labels, const std::vector<std::string>& sample_ids) {
  if (labels.sample_ids() == sample_ids) return labels;
  std::map<std::string, std::size_t> index;
  for (std::size_t s = 0; s < labels.samples(); ++s) index.emplace(labels.sample_ids()[s], s);
  std::vector<std::uint8_t> values;
  values.reserve(sample_ids.size() * labels.classes());
  for (const auto& id : sample_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ValidationError("no labels for sample '" + id + "'");
    auto row = labels.row(it->second);
    values.insert(values.end(), row.begin(), row.end());
  }
  return LabelMatrix(labels.class_names(), sample_ids, std::move(values));
}

EvalReport evaluate(const ScoreMatrix& scores, const LabelMatrix& labels) {
  if (scores.sample_ids.empty()) throw ValidationError("evaluate: no samples");
  require_same_classes(scores.classes, "scores", labels.class_names(), "labels");
  if (scores.values.rows() != scores.sample_ids.size() ||
      scores.values.cols() != scores.classes.size()) {
    throw ShapeError("evaluate: score matrix shape does not match its ids/classes");
  }
  const LabelMatrix aligned = align_labels(labels, scores.sample_ids);

  EvalReport report;
  double auc_sum = 0.0, sens_sum = 0.0, spec_sum = 0.0;
  std::size_t included = 0;
  std::vector<double> column(scores.sample_ids.size());
  for (std::size_t c = 0; c < scores.classes.size(); ++c) {
    ClassReport cr;
    cr.name = scores.classes[c];
    const auto truth = aligned.column(c);
    for (std::size_t s = 0; s < column.size(); ++s) {
      column[s] = scores.values(s, c);
      (truth[s] ? cr.positives : cr.negatives) += 1;
    }
    if (cr.positives == 0 || cr.negatives == 0) {
      cr.skipped = true;
      report.skipped.push_back(cr.name);
    } else {
      cr.roc = roc_curve(column, truth);
      cr.auc = cr.roc.auc;
      cr.point = youden_point(column, truth);
      auc_sum += cr.auc;
      sens_sum += cr.point.sensitivity;
      spec_sum += cr.point.specificity;
      ++included;
    }
    report.classes.push_back(std::move(cr));
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double k = static_cast<double>(included);
  report.macro_auc = included ? auc_sum / k : nan;
  report.macro_sensitivity = included ? sens_sum / k : nan;
  report.macro_specificity = included ? spec_sum / k : nan;
  return report;
}

nlohmann::json report_to_json(const EvalReport& report, bool include_roc) {
  nlohmann::json per_class = nlohmann::json::array();
  for (const ClassReport& c : report.classes) {
    nlohmann::json j{{"class", c.name},
                     {"positives", c.positives},
                     {"negatives", c.negatives},
                     {"skipped", c.skipped}};
    if (c.skipped) {
      j["auc"] = nullptr;
      j["sensitivity"] = nullptr;
      j["specificity"] = nullptr;
      j["threshold"] = nullptr;
    } else {
      j["auc"] = c.auc;
      j["sensitivity"] = c.point.sensitivity;
      j["specificity"] = c.point.specificity;
      j["threshold"] = number_or_text(c.point.threshold);
      if (include_roc) {
        nlohmann::json thresholds = nlohmann::json::array();
        for (double t : c.roc.thresholds) thresholds.push_back(number_or_text(t));
        j["roc"] = {{"threshold", std::move(thresholds)},
                    {"sensitivity", c.roc.sensitivity},
                    {"specificity", c.roc.specificity}};
      }
    }
    per_class.push_back(std::move(j));
  }
  return {{"macro_auc", number_or_text(report.macro_auc)},
          {"macro_sensitivity", number_or_text(report.macro_sensitivity)},
          {"macro_specificity", number_or_text(report.macro_specificity)},
          {"skipped", report.skipped},
          {"classes", std::move(per_class)}};
}

std::string report_table(const EvalReport& report) {
  std::size_t width = 6;
  for (const ClassReport& c : report.classes) width = std::max(width, c.name.size() + 1);
  auto cell = [width](const std::string& s) {
    return std::string(width > s.size() ? width - s.size() : 1, ' ') + s;
  };
  std::ostringstream out;
  out << "      ";
  for (const ClassReport& c : report.classes) out << cell(c.name);
  out << cell("Avg.") << '\n';
  auto row = [&](const char* label, auto value, double avg) {
    out << label;
    for (const ClassReport& c : report.classes) out << cell(c.skipped ? "-" : fixed3(value(c)));
    out << cell(std::isnan(avg) ? "-" : fixed3(avg)) << '\n';
  };
  row("AUC   ", [](const ClassReport& c) { return c.auc; }, report.macro_auc);
  row("Sens. ", [](const ClassReport& c) { return c.point.sensitivity; }, report.macro_sensitivity);
  row("Spec. ", [](const ClassReport& c) { return c.point.specificity; }, report.macro_specificity);
  if (!report.skipped.empty()) {
    out << "skipped (single label value):";
    for (const auto& s : report.skipped) out << ' ' << s;
    out << '\n';
  }
  return out.str();
}

std::string report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "class,auc,sensitivity,specificity,threshold,skipped\n";
  for (const ClassReport& c : report.classes) {
    out << c.name << ',';
    if (c.skipped) {
      out << ",,,,1\n";
      continue;
    }
    const double t = c.point.threshold;
    out << io::format_double(c.auc) << ',' << io::format_double(c.point.sensitivity) << ','
        << io::format_double(c.point.specificity) << ','
        << (std::isfinite(t) ? io::format_double(t) : (t > 0 ? "inf" : "-inf")) << ",0\n";
  }
  return out.str();
}

}  // namespace gnnfuse
