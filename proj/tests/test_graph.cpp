#include <algorithm>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/io.hpp"
#include "gnnfuse/random.hpp"
#include "oracles/kappa_oracle.hpp"

using namespace gnnfuse;

namespace {

using Bits = std::vector<std::uint8_t>;

LabelMatrix from_columns(const std::vector<Bits>& cols) {
  const std::size_t c = cols.size(), s = cols[0].size();
  std::vector<std::string> names, ids;
  for (std::size_t i = 0; i < c; ++i) names.push_back("d" + std::to_string(i));
  for (std::size_t r = 0; r < s; ++r) ids.push_back("s" + std::to_string(r));
  std::vector<std::uint8_t> v(s * c);
  for (std::size_t r = 0; r < s; ++r)
    for (std::size_t i = 0; i < c; ++i) v[r * c + i] = cols[i][r];
  return LabelMatrix(names, ids, v);
}

std::vector<Bits> random_columns(Rng& rng, std::size_t samples, std::size_t classes) {
  std::vector<Bits> cols(classes, Bits(samples));
  for (std::size_t i = 0; i < classes; ++i) {
    const double p = rng.uniform(0.05, 0.6);
    for (std::size_t r = 0; r < samples; ++r) {
      // Some columns copy their predecessor to create ties and strong pairs.
      cols[i][r] = (i > 0 && rng.uniform() < 0.3) ? cols[i - 1][r] : (rng.uniform() < p);
    }
  }
  return cols;
}

}  // namespace

TEST_CASE("cohen kappa on small tables") {
  const Bits x{1, 0, 1, 0};
  CHECK(cohen_kappa(x, x).kappa == 1.0);

  const KappaStats s = cohen_kappa(Bits{1, 1, 0, 0}, Bits{1, 1, 1, 0});
  CHECK(s.observed == 0.75);
  CHECK(s.chance == 0.5);
  CHECK(s.kappa == 0.5);

  const Bits ones{1, 1, 1, 1};
  const KappaStats d = cohen_kappa(ones, ones);
  CHECK(d.chance == 1.0);
  CHECK(d.kappa == 0.0);

  CHECK_THROWS_AS(cohen_kappa(Bits{1, 0}, Bits{1}), ValidationError);
  CHECK_THROWS_AS(cohen_kappa(Bits{}, Bits{}), ValidationError);
}

TEST_CASE("kappa symmetry, self agreement and complement") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 * (5 + rng.below(50));
    Bits x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.uniform() < 0.4, y[i] = rng.uniform() < 0.5;
    if (std::count(x.begin(), x.end(), 1) == 0) x[0] = 1;
    if (std::count(x.begin(), x.end(), 1) == static_cast<long>(n)) x[0] = 0;
    CHECK(cohen_kappa(x, y).kappa == cohen_kappa(y, x).kappa);
    CHECK(cohen_kappa(x, x).kappa == 1.0);

    Bits half(n), flipped(n);
    for (std::size_t i = 0; i < n; ++i) half[i] = i < n / 2;
    std::shuffle(half.begin(), half.end(), std::mt19937(trial));
    for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - half[i];
    CHECK(cohen_kappa(half, flipped).kappa == -1.0);
  }
}

TEST_CASE("three identical columns keep both other vertices") {
  const Bits col{1, 0, 1, 1, 0, 0, 1};
  const ComorbidityGraph g = build_graph(from_columns({col, col, col}), 2);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(g.in_neighbors(i).size() == 2);
    for (std::size_t j = 0; j < 3; ++j) CHECK(g.weight(j, i) == (i == j ? 0.0 : 1.0));
  }
}

TEST_CASE("k = 1 keeps the strongest source per target") {
  Rng rng(4);
  const auto cols = random_columns(rng, 50, 4);
  const ComorbidityGraph g = build_graph(from_columns(cols), 1);
  const Matrix kappa = kappa_matrix(from_columns(cols));
  for (std::size_t i = 0; i < 4; ++i) {
    std::size_t best = i == 0 ? 1 : 0;
    for (std::size_t j = 0; j < 4; ++j)
      if (j != i && std::abs(kappa(j, i)) > std::abs(kappa(best, i))) best = j;
    REQUIRE(g.in_neighbors(i).size() == 1);
    CHECK(g.in_neighbors(i)[0] == best);
  }
}

TEST_CASE("k = C-1 leaves the kappa matrix intact") {
  Rng rng(9);
  const LabelMatrix labels = from_columns(random_columns(rng, 80, 5));
  const ComorbidityGraph g = build_graph(labels, 4);
  CHECK(g.adjacency() == kappa_matrix(labels));
}

TEST_CASE("build_graph matches the brute-force oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t classes = 2 + rng.below(7), samples = 1 + rng.below(200);
    const auto cols = random_columns(rng, samples, classes);
    const std::size_t k = 1 + rng.below(classes - 1);
    const ComorbidityGraph g = build_graph(from_columns(cols), k);
    const auto expected = oracle::pruned_adjacency(cols, k);
    for (std::size_t j = 0; j < classes; ++j)
      for (std::size_t i = 0; i < classes; ++i)
        CHECK(std::abs(g.weight(j, i) - expected[j * classes + i]) <= 1e-12);
    for (std::size_t i = 0; i < classes; ++i) CHECK(g.in_neighbors(i).size() <= k);
  }
}

TEST_CASE("build_graph rejects k out of range") {
  Rng rng(1);
  const LabelMatrix labels = from_columns(random_columns(rng, 20, 3));
  CHECK_THROWS_AS(build_graph(labels, 0), ValidationError);
  CHECK_THROWS_AS(build_graph(labels, 3), ValidationError);
}

TEST_CASE("label matrix validation") {
  CHECK_THROWS_AS(LabelMatrix({"a"}, {"s"}, {1}), ValidationError);
  CHECK_THROWS_AS(LabelMatrix({"a", "b"}, {"s"}, {1, 2}), ValidationError);
  CHECK_THROWS_AS(LabelMatrix({"a", "a"}, {"s"}, {1, 0}), ValidationError);
  CHECK_THROWS_AS(LabelMatrix({"a", "b"}, {}, {}), ValidationError);
}

TEST_CASE("graph invariants are enforced") {
  const std::vector<std::string> names{"a", "b", "c"};
  Matrix diag(3, 3);
  diag(1, 1) = 0.2;
  CHECK_THROWS_AS(ComorbidityGraph(names, 1, diag), ValidationError);
  Matrix big(3, 3);
  big(0, 1) = 1.5;
  CHECK_THROWS_AS(ComorbidityGraph(names, 1, big), ValidationError);
  Matrix crowded(3, 3);
  crowded(0, 2) = 0.3;
  crowded(1, 2) = 0.4;
  CHECK_THROWS_AS(ComorbidityGraph(names, 1, crowded), ValidationError);
  CHECK_NOTHROW(ComorbidityGraph(names, 2, crowded));
  CHECK_THROWS_AS(ComorbidityGraph(names, 2, crowded, {{}, {}, {0}}), ValidationError);
  CHECK_THROWS_AS(ComorbidityGraph(names, 2, Matrix(2, 2)), ValidationError);
}

TEST_CASE("relabeling moves edges with their endpoints") {
  Rng rng(31);
  const ComorbidityGraph g = build_graph(from_columns(random_columns(rng, 120, 5)), 2);
  const std::vector<std::size_t> perm{3, 0, 4, 1, 2};
  const ComorbidityGraph h = g.relabeled(perm);
  for (std::size_t j = 0; j < 5; ++j) {
    CHECK(h.classes()[perm[j]] == g.classes()[j]);
    for (std::size_t i = 0; i < 5; ++i) CHECK(h.weight(perm[j], perm[i]) == g.weight(j, i));
  }
}

TEST_CASE("graph json round trip and import checks") {
  Rng rng(5);
  const ComorbidityGraph g = build_graph(from_columns(random_columns(rng, 150, 6)), 3);
  const auto dir = std::filesystem::temp_directory_path() / "gnnfuse_test_graph";
  std::filesystem::create_directories(dir);
  export_graph(g, dir / "g.json");
  CHECK(import_graph(dir / "g.json") == g);
  CHECK(graph_from_json(graph_to_json(g)) == g);
  CHECK(graph_hash(g) == graph_hash(import_graph(dir / "g.json")));

  nlohmann::json flat = graph_to_json(g);
  std::vector<double> cells;
  for (std::size_t j = 0; j < 6; ++j)
    for (std::size_t i = 0; i < 6; ++i) cells.push_back(g.weight(j, i));
  flat["adjacency"] = cells;
  CHECK(graph_from_json(flat) == g);

  nlohmann::json self = graph_to_json(g);
  self["adjacency"][2][2] = 0.5;
  CHECK_THROWS_AS(graph_from_json(self), ValidationError);
  nlohmann::json wide = graph_to_json(g);
  wide["adjacency"][0][1] = 1.2;
  CHECK_THROWS_AS(graph_from_json(wide), ValidationError);
  nlohmann::json short_rows = graph_to_json(g);
  short_rows["adjacency"].erase(0);
  CHECK_THROWS_AS(graph_from_json(short_rows), ValidationError);
  io::write_text(dir / "bad.json", "{not json");
  CHECK_THROWS_AS(import_graph(dir / "bad.json"), ValidationError);
  std::filesystem::remove_all(dir);
}
