#include <cmath>
#include <limits>

#include "doctest.h"
#include "fixtures.hpp"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/metrics.hpp"
#include "oracles/metric_oracle.hpp"

using namespace gnnfuse;

namespace {

using Scores = std::vector<double>;
using Bits = std::vector<std::uint8_t>;

void random_set(Rng& rng, std::size_t n, Scores& s, Bits& y) {
  s.assign(n, 0.0);
  y.assign(n, 0);
  const std::size_t levels = 1 + rng.below(n);  // few levels force ties
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = static_cast<double>(rng.below(levels)) / static_cast<double>(levels);
    y[i] = rng.uniform() < 0.4;
  }
  y[0] = 1;
  y[n - 1] = 0;
}

ScoreMatrix scores_from(const std::vector<Scores>& cols) {
  const std::size_t n = cols[0].size();
  ScoreMatrix m{fixture::names("c", cols.size()), fixture::names("s", n), Matrix(n, cols.size())};
  for (std::size_t c = 0; c < cols.size(); ++c)
    for (std::size_t s = 0; s < n; ++s) m.values(s, c) = cols[c][s];
  return m;
}

LabelMatrix labels_from(const std::vector<Bits>& cols) {
  const std::size_t n = cols[0].size();
  std::vector<std::uint8_t> v;
  for (std::size_t s = 0; s < n; ++s)
    for (const auto& c : cols) v.push_back(c[s]);
  return LabelMatrix(fixture::names("c", cols.size()), fixture::names("s", n), v);
}

}  // namespace

TEST_CASE("auc on small examples") {
  const Scores s{0.9, 0.8, 0.3, 0.2};
  CHECK(auc(s, Bits{1, 1, 0, 0}) == 1.0);
  CHECK(auc(s, Bits{1, 0, 1, 0}) == 0.75);
  CHECK(auc(Scores{0.4, 0.4, 0.4}, Bits{1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(auc(s, Bits{1, 1, 1, 1}), ValidationError);
  CHECK_THROWS_AS(auc(s, Bits{1, 0}), ValidationError);
}

TEST_CASE("auc matches all pairs, complements exactly and ignores monotone maps") {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    Scores s;
    Bits y;
    random_set(rng, 2 + rng.below(800), s, y);
    const double a = auc(s, y);
    CHECK(std::abs(a - oracle::pairwise_auc(s, y)) <= 1e-12);
    Bits flipped(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) flipped[i] = 1 - y[i];
    CHECK(a + auc(s, flipped) == 1.0);
    Scores warped(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) warped[i] = std::exp(3.0 * s[i]) - 7.0;
    CHECK(auc(warped, y) == a);
  }
}

TEST_CASE("youden point examples") {
  const OperatingPoint p = youden_point(Scores{0.9, 0.6, 0.4, 0.1}, Bits{1, 1, 0, 0});
  CHECK(p.threshold > 0.4);
  CHECK(p.threshold < 0.6);
  CHECK(p.sensitivity == 1.0);
  CHECK(p.specificity == 1.0);
  CHECK(p.youden() == 1.0);

  const OperatingPoint flat = youden_point(Scores{0.3, 0.3, 0.3}, Bits{1, 0, 0});
  CHECK(flat.youden() == 0.0);
  // Equal J at both sentinels: higher specificity wins.
  CHECK(flat.specificity == 1.0);
  CHECK(flat.threshold == std::numeric_limits<double>::infinity());
}

TEST_CASE("youden J equals the exhaustive scan") {
  Rng rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    Scores s;
    Bits y;
    random_set(rng, 2 + rng.below(400), s, y);
    const OperatingPoint p = youden_point(s, y);
    CHECK(p.youden() == oracle::best_youden(s, y));
  }
}

TEST_CASE("midpoint thresholds survive adjacent doubles") {
  const double a = 0.5, b = std::nextafter(0.5, 1.0);
  const OperatingPoint p = youden_point(Scores{b, a}, Bits{1, 0});
  CHECK(p.youden() == 1.0);
  CHECK(p.threshold >= a);
  CHECK(p.threshold < b);
}

TEST_CASE("roc curve endpoints and auc") {
  Rng rng(3);
  Scores s;
  Bits y;
  random_set(rng, 200, s, y);
  const RocCurve r = roc_curve(s, y);
  CHECK(r.thresholds.front() == -std::numeric_limits<double>::infinity());
  CHECK(r.thresholds.back() == std::numeric_limits<double>::infinity());
  CHECK(r.sensitivity.front() == 1.0);
  CHECK(r.specificity.front() == 0.0);
  CHECK(r.sensitivity.back() == 0.0);
  CHECK(r.specificity.back() == 1.0);
  CHECK(r.auc == auc(s, y));
  for (std::size_t i = 1; i < r.thresholds.size(); ++i) {
    CHECK(r.thresholds[i] > r.thresholds[i - 1]);
    CHECK(r.sensitivity[i] <= r.sensitivity[i - 1]);
  }
}

TEST_CASE("evaluate skips single-class columns") {
  const ScoreMatrix s = scores_from({{0.9, 0.2, 0.7, 0.1}, {0.5, 0.6, 0.1, 0.3}});
  const LabelMatrix l = labels_from({{1, 0, 1, 0}, {0, 0, 0, 0}});
  const EvalReport r = evaluate(s, l);
  CHECK(r.skipped == std::vector<std::string>{"c1"});
  CHECK(r.macro_auc == 1.0);
  CHECK(r.classes[1].skipped);

  const nlohmann::json j = report_to_json(r);
  CHECK(j["classes"][1]["auc"].is_null());
  CHECK(j["macro_auc"] == 1.0);
  CHECK(j["classes"][0]["roc"]["threshold"][0] == "-inf");
  CHECK(!report_to_json(r, false)["classes"][0].contains("roc"));
  CHECK(report_csv(r).find("c1,,,,,1") != std::string::npos);
  CHECK(report_table(r).find("Avg.") != std::string::npos);
}

TEST_CASE("labels-as-scores give a perfect report") {
  Rng rng(5);
  std::vector<Bits> cols(3, Bits(50));
  std::vector<Scores> sc(3, Scores(50));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t s = 0; s < 50; ++s) sc[c][s] = cols[c][s] = s % (c + 2) == 0;
  const EvalReport r = evaluate(scores_from(sc), labels_from(cols));
  CHECK(r.macro_auc == 1.0);
  for (const auto& c : r.classes) CHECK(c.auc == 1.0);
}

TEST_CASE("random scores score about one half") {
  Rng rng(10);
  std::vector<Scores> sc(4, Scores(10000));
  std::vector<Bits> cols(4, Bits(10000));
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t s = 0; s < 10000; ++s) sc[c][s] = rng.uniform(), cols[c][s] = rng.uniform() < 0.5;
  CHECK(std::abs(evaluate(scores_from(sc), labels_from(cols)).macro_auc - 0.5) < 0.02);
}

TEST_CASE("evaluate aligns by sample id and validates inputs") {
  const ScoreMatrix s = scores_from({{0.9, 0.2, 0.7, 0.1}, {0.5, 0.6, 0.1, 0.3}});
  const LabelMatrix l = labels_from({{1, 0, 1, 0}, {0, 1, 0, 1}});
  std::vector<std::string> reversed(l.sample_ids().rbegin(), l.sample_ids().rend());
  const LabelMatrix shuffled = align_labels(l, reversed);
  CHECK(evaluate(s, shuffled).macro_auc == evaluate(s, l).macro_auc);

  ScoreMatrix renamed = s;
  renamed.classes = {"x", "y"};
  CHECK_THROWS_AS(evaluate(renamed, l), ValidationError);
  ScoreMatrix unknown = s;
  unknown.sample_ids[0] = "ghost";
  CHECK_THROWS_AS(evaluate(unknown, l), ValidationError);

  const EvalReport none = evaluate(scores_from({{0.1, 0.2}, {0.3, 0.4}}), labels_from({{1, 1}, {0, 0}}));
  CHECK(std::isnan(none.macro_auc));
  CHECK(report_to_json(none)["macro_auc"].is_null());
}
