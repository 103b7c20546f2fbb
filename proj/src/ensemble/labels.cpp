#include <map>
#include <sstream>

#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/io.hpp"

namespace gnnfuse {

namespace {

void require_header(const io::CsvTable& t, const std::filesystem::path& path) {
  if (t.header.size() < 2 || t.header[0] != "sample_id") {
    throw ValidationError(path.string() + ": header must be sample_id,<classes...>");
  }
}

void require_unique(const std::vector<std::string>& ids, const std::filesystem::path& path) {
  std::map<std::string, int> seen;
  for (const auto& id : ids) {
    if (++seen[id] > 1) throw ValidationError(path.string() + ": duplicate sample_id '" + id + "'");
  }
}

}  // namespace

LabelMatrix load_labels(const std::filesystem::path& path) {
  const io::CsvTable t = io::read_csv(path);
  require_header(t, path);
  std::vector<std::string> classes(t.header.begin() + 1, t.header.end());
  std::vector<std::string> ids;
  std::vector<std::uint8_t> values;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    ids.push_back(row[0]);
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const std::string cell = path.string() + ":" + std::to_string(t.lines[r]) + " column " + classes[i];
      const double v = io::parse_double(row[i + 1], cell);
      if (v == 1.0) {
        values.push_back(1);
      } else if (v == 0.0 || v == -1.0) {
        values.push_back(0);  // uncertain counts as absent
      } else {
        throw ValidationError(cell + ": label must be 1, 0 or -1, got '" + row[i + 1] + "'");
      }
    }
  }
  if (ids.empty()) throw ValidationError(path.string() + ": no label rows");
  require_unique(ids, path);
  return LabelMatrix(std::move(classes), std::move(ids), std::move(values));
}

void save_labels(const LabelMatrix& labels, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "sample_id";
  for (const auto& c : labels.class_names()) out << ',' << c;
  out << '\n';
  for (std::size_t s = 0; s < labels.samples(); ++s) {
    out << labels.sample_ids()[s];
    for (std::size_t c = 0; c < labels.classes(); ++c) out << ',' << int{labels.at(s, c)};
    out << '\n';
  }
  io::write_text(path, out.str());
}

ScoreMatrix load_scores(const std::filesystem::path& path) {
  const io::CsvTable t = io::read_csv(path);
  require_header(t, path);
  ScoreMatrix out;
  out.classes.assign(t.header.begin() + 1, t.header.end());
  const std::size_t c = out.classes.size();
  std::vector<double> values;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    out.sample_ids.push_back(t.rows[r][0]);
    for (std::size_t i = 0; i < c; ++i) {
      const std::string cell = path.string() + ":" + std::to_string(t.lines[r]) + " column " + out.classes[i];
      const double v = io::parse_double(t.rows[r][i + 1], cell);
      if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(cell + ": score outside [0, 1]");
      values.push_back(v);
    }
  }
  if (out.sample_ids.empty()) throw ValidationError(path.string() + ": no score rows");
  require_unique(out.sample_ids, path);
  out.values = Matrix(out.sample_ids.size(), c, std::move(values));
  return out;
}

void save_scores(const ScoreMatrix& scores, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "sample_id";
  for (const auto& c : scores.classes) out << ',' << c;
  out << '\n';
  for (std::size_t s = 0; s < scores.sample_ids.size(); ++s) {
    out << scores.sample_ids[s];
    for (std::size_t c = 0; c < scores.classes.size(); ++c)
      out << ',' << io::format_double(scores.values(s, c));
    out << '\n';
  }
  io::write_text(path, out.str());
}

}  // namespace gnnfuse
