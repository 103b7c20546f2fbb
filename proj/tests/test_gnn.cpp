#include <cmath>
#include <filesystem>
#include <numeric>

#include "doctest.h"
#include "fixtures.hpp"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/gnn.hpp"
#include "gnnfuse/io.hpp"
#include "oracles/eq1_oracle.hpp"

using namespace gnnfuse;
namespace fs = std::filesystem;

namespace {

ComorbidityGraph chain3() {
  Matrix a(3, 3);
  a(0, 1) = 0.6;   // 0 -> 1
  a(1, 2) = -0.4;  // 1 -> 2
  return ComorbidityGraph({"x", "y", "z"}, 1, a);
}

ComorbidityGraph empty_graph(std::size_t c) {
  return ComorbidityGraph(fixture::names("d", c), 1, Matrix(c, c));
}

}  // namespace

TEST_CASE("dimension schedule follows the 1.3 recurrence") {
  CHECK(DimensionSchedule::make(40, 30, 5).dims() == std::vector<std::size_t>{40, 30, 39, 50, 65, 1});
  CHECK(DimensionSchedule::make(6, 8, 1).dims() == std::vector<std::size_t>{6, 1});
  CHECK(DimensionSchedule::make(6, 8, 2).dims() == std::vector<std::size_t>{6, 8, 1});
  CHECK_THROWS_AS(DimensionSchedule::make(6, 8, 0), ValidationError);
  CHECK_THROWS_AS(DimensionSchedule({4, 3, 2}), ValidationError);
}

TEST_CASE("presets") {
  const auto& r = architecture_preset("resnet18");
  CHECK(r.layers == 5);
  CHECK(r.k == 5);
  CHECK(architecture_preset("densenet121").layers == 8);
  CHECK(architecture_preset("xception").k == 9);
  for (const auto& p : architecture_presets()) {
    CHECK(p.inputs == 40);
    CHECK(p.first_width == 30);
  }
  CHECK_THROWS_AS(architecture_preset("vgg"), ValidationError);
}

TEST_CASE("zero layer without neighbours outputs zero") {
  GnnModel model(DimensionSchedule({4, 3, 1}), empty_graph(3));
  Tape tape;
  std::vector<VertexFeatures> batch{{Matrix(3, 4, 0.7)}};
  const auto in = input_features(tape, batch);
  const auto out = message_pass(tape, model.layers()[0], model.graph(), in);
  for (Var v : out) CHECK(tape.value(v) == Matrix(3, 1));
}

TEST_CASE("zero network predicts one half everywhere") {
  Rng rng(1);
  GnnModel model(DimensionSchedule::make(5, 6, 3), fixture::random_graph(rng, 4, 2));
  const auto y = forward(model, fixture::random_features(rng, 4, 5));
  for (double v : y) CHECK(v == 0.5);
}

TEST_CASE("message passing matches the scalar oracle on a chain") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    const GnnModel model = fixture::random_model(rng, chain3(), 4, 5, 2, seed);
    const VertexFeatures f = fixture::random_features(rng, 3, 4);
    const auto got = forward(model, f);
    const auto want = oracle::eq1_forward(model, fixture::rows_of(f));
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(got[i] - want[i]) <= 1e-12);
  }
}

TEST_CASE("random C=5, L=3 model matches the scalar oracle") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 100);
    const ComorbidityGraph g = fixture::random_graph(rng, 5, 2);
    const GnnModel model = fixture::random_model(rng, g, 6, 7, 3, seed);
    const VertexFeatures f = fixture::random_features(rng, 5, 6);
    const auto got = forward(model, f);
    const auto want = oracle::eq1_forward(model, fixture::rows_of(f));
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::abs(got[i] - want[i]) <= 1e-12);
      CHECK(got[i] > 0.0);
      CHECK(got[i] < 1.0);
    }
  }
}

TEST_CASE("batched forward equals per-sample forward exactly") {
  Rng rng(8);
  const GnnModel model = fixture::random_model(rng, fixture::random_graph(rng, 4, 2), 5, 6, 3, 8);
  std::vector<VertexFeatures> batch;
  for (int b = 0; b < 6; ++b) batch.push_back(fixture::random_features(rng, 4, 5));
  const Matrix all = forward(model, batch);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto one = forward(model, batch[b]);
    for (std::size_t i = 0; i < 4; ++i) CHECK(all(i, b) == one[i]);
  }
}

TEST_CASE("empty graph decouples vertices into independent MLPs") {
  Rng rng(21);
  const GnnModel model = fixture::random_model(rng, empty_graph(4), 3, 5, 3, 21);
  VertexFeatures f = fixture::random_features(rng, 4, 3);
  const auto base = forward(model, f);
  for (std::size_t q = 0; q < 3; ++q) f.values(2, q) = rng.uniform();
  const auto moved = forward(model, f);
  CHECK(moved[0] == base[0]);
  CHECK(moved[1] == base[1]);
  CHECK(moved[3] == base[3]);
  CHECK(moved[2] != base[2]);
}

TEST_CASE("a vertex with no incoming edges ignores the other inputs") {
  Rng rng(13);
  const ComorbidityGraph g = fixture::random_graph(rng, 5, 2);
  Matrix a = g.adjacency();
  for (std::size_t j = 0; j < 5; ++j) a(j, 3) = 0.0;
  const ComorbidityGraph cut(g.classes(), g.k(), a);
  const GnnModel model = fixture::random_model(rng, cut, 4, 6, 3, 13);
  VertexFeatures f = fixture::random_features(rng, 5, 4);
  const double before = forward(model, f)[3];
  for (std::size_t i = 0; i < 5; ++i)
    if (i != 3)
      for (std::size_t q = 0; q < 4; ++q) f.values(i, q) = rng.uniform();
  CHECK(forward(model, f)[3] == before);
}

TEST_CASE("edge MLP output range and dependence on the edge weight") {
  EdgeMlp zero(3, 2, "h");
  zero.b2.value = Matrix(6, 1, {0.1, -0.2, 0.3, 0.0, 2.0, -1.0});
  const Matrix at_a = edge_weight_matrix(zero, 0.7);
  CHECK(at_a == edge_weight_matrix(zero, -0.3));
  CHECK(at_a(0, 1) == std::tanh(-0.2));
  CHECK(at_a(2, 0) == std::tanh(2.0));

  Rng rng(5);
  const GnnModel model = fixture::random_model(rng, chain3(), 4, 5, 2, 5);
  const EdgeMlp& mlp = model.layers()[0].edge_mlp;
  CHECK(mlp.hidden == 10);
  const Matrix pos = edge_weight_matrix(mlp, 0.5), neg = edge_weight_matrix(mlp, -0.5);
  CHECK(pos.rows() == 5);
  CHECK(pos.cols() == 4);
  CHECK(pos != neg);
  for (double v : pos.values()) CHECK(std::abs(v) < 1.0);
  CHECK_THROWS_AS(edge_weight_matrix(mlp, std::nan("")), ValidationError);
  CHECK(EdgeMlp(1, 1, "h").hidden == 1);
}

TEST_CASE("relabeling vertices permutes the outputs") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed + 50);
    const ComorbidityGraph g = fixture::random_graph(rng, 6, 3);
    const GnnModel model = fixture::random_model(rng, g, 4, 5, 3, seed);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(seed));
    GnnModel moved(model.schedule(), g.relabeled(perm));
    moved.layers() = model.layers();
    const VertexFeatures f = fixture::random_features(rng, 6, 4);
    VertexFeatures pf{Matrix(6, 4)};
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t q = 0; q < 4; ++q) pf.values(perm[i], q) = f.values(i, q);
    const auto a = forward(model, f), b = forward(moved, pf);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(b[perm[i]] - a[i]) <= 1e-12);
  }
}

TEST_CASE("neighbour storage order does not change the output") {
  Rng rng(77);
  const ComorbidityGraph g = fixture::random_graph(rng, 6, 4);
  const GnnModel model = fixture::random_model(rng, g, 4, 5, 2, 77);
  std::vector<std::vector<std::size_t>> reversed;
  for (std::size_t i = 0; i < 6; ++i)
    reversed.emplace_back(g.in_neighbors(i).rbegin(), g.in_neighbors(i).rend());
  GnnModel flipped(model.schedule(), ComorbidityGraph(g.classes(), g.k(), g.adjacency(), reversed));
  flipped.layers() = model.layers();
  const VertexFeatures f = fixture::random_features(rng, 6, 4);
  const auto a = forward(model, f), b = forward(flipped, f);
  for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("initialisation is seeded and fan-in scaled") {
  Rng rng(1);
  const ComorbidityGraph g = fixture::random_graph(rng, 3, 1);
  const auto schedule = DimensionSchedule({50, 40, 1});
  const GnnModel a = init_model(schedule, g, 4), b = init_model(schedule, g, 4), c = init_model(schedule, g, 5);
  CHECK(a.layers()[0].weight.value == b.layers()[0].weight.value);
  CHECK(a.layers()[0].weight.value != c.layers()[0].weight.value);
  CHECK(a.layers()[0].bias.value == Matrix(40, 1));

  const Matrix& w = a.layers()[0].weight.value;
  double sq = 0.0, mean = 0.0;
  for (double v : w.values()) mean += v;
  mean /= static_cast<double>(w.size());
  for (double v : w.values()) sq += (v - mean) * (v - mean);
  const double sd = std::sqrt(sq / static_cast<double>(w.size()));
  const double want = std::sqrt(1.0 / 50.0) / std::sqrt(3.0);
  CHECK(std::abs(sd - want) / want < 0.1);
  const double bound = std::sqrt(1.0 / 50.0);
  for (double v : w.values()) CHECK(std::abs(v) <= bound);
}

TEST_CASE("forward rejects the wrong ensemble size") {
  Rng rng(2);
  const GnnModel model = fixture::random_model(rng, chain3(), 4, 5, 2, 2);
  CHECK_THROWS_AS(forward(model, fixture::random_features(rng, 3, 5)), ShapeError);
}

TEST_CASE("checkpoint round trip and rejection") {
  const fs::path dir = fs::temp_directory_path() / "gnnfuse_test_gnn";
  fs::create_directories(dir);
  Rng rng(9);
  const ComorbidityGraph g = fixture::random_graph(rng, 5, 2);
  const GnnModel model = fixture::random_model(rng, g, 4, 6, 3, 9);
  save_model(model, dir / "m.json");
  const GnnModel back = load_model(dir / "m.json");
  const VertexFeatures probe = fixture::random_features(rng, 5, 4);
  CHECK(forward(back, probe) == forward(model, probe));
  for (std::size_t l = 0; l < 3; ++l) CHECK(back.layers()[l].weight.value == model.layers()[l].weight.value);
  CHECK_NOTHROW(load_model(dir / "m.json", g));

  save_model(back, dir / "again.json");
  CHECK(io::read_text(dir / "again.json") == io::read_text(dir / "m.json"));

  nlohmann::json j = nlohmann::json::parse(io::read_text(dir / "m.json"));
  nlohmann::json tampered = j;
  tampered["schedule"][1] = 7;
  CHECK_THROWS_AS(model_from_json(tampered), ValidationError);
  tampered = j;
  tampered["graph_hash"] = "fnv1a64:0000000000000000";
  CHECK_THROWS_AS(model_from_json(tampered), ValidationError);

  Rng other(10);
  CHECK_THROWS_AS(load_model(dir / "m.json", fixture::random_graph(other, 6, 2)), ValidationError);
  CHECK_THROWS_AS(load_model(dir / "m.json", fixture::random_graph(other, 5, 2)), ValidationError);
  fs::remove_all(dir);
}
