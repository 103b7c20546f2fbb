#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gnnfuse/errors.hpp"
#include "gnnfuse/metrics.hpp"
#include "gnnfuse/synth.hpp"

using namespace gnnfuse;

namespace {

SynthConfig pairs_only(std::vector<LatentPair> latent, std::size_t samples) {
  SynthConfig c;
  c.classes = 4;
  c.samples = samples;
  c.test_samples = 0;
  c.latent = std::move(latent);
  return c;
}

// Macro AUC of model m's raw scores.
double single_model_auc(const PredictionTensor& p, const LabelMatrix& l, std::size_t m) {
  ScoreMatrix s{p.class_names(), p.sample_ids(), Matrix(p.samples(), p.classes())};
  for (std::size_t i = 0; i < p.samples(); ++i)
    for (std::size_t c = 0; c < p.classes(); ++c) s.values(i, c) = p.score(i, m, c);
  return evaluate(s, l).macro_auc;
}

}  // namespace

TEST_CASE("strong latent correlation shows up as kappa") {
  const LabelMatrix l = generate_labels(pairs_only({{0, 1, 0.9}, {2, 3, -0.9}}, 10000));
  CHECK(cohen_kappa(l.column(0), l.column(1)).kappa > 0.4);
  CHECK(cohen_kappa(l.column(2), l.column(3)).kappa < -0.2);
  CHECK(l.samples() == 10000);
}

TEST_CASE("independent latents give near-zero kappa") {
  const LabelMatrix l = generate_labels(pairs_only({}, 10000));
  const Matrix k = kappa_matrix(l);
  for (double v : k.values()) CHECK(std::abs(v) < 0.05);
}

TEST_CASE("prevalence is respected") {
  SynthConfig c = pairs_only({}, 20000);
  c.prevalence = {0.1, 0.3, 0.5, 0.7};
  const LabelMatrix l = generate_labels(c);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto col = l.column(i);
    const double rate = static_cast<double>(std::count(col.begin(), col.end(), 1)) / 20000.0;
    CHECK(std::abs(rate - c.prevalence[i]) < 0.015);
  }
}

TEST_CASE("generation is seed deterministic") {
  const SynthConfig c = benchmark_config();
  const SynthDataset a = generate_dataset(c), b = generate_dataset(c);
  CHECK(a.train_labels == b.train_labels);
  CHECK(a.test_predictions == b.test_predictions);
  SynthConfig other = c;
  other.seed += 1;
  CHECK(!(generate_dataset(other).train_labels == a.train_labels));
}

TEST_CASE("an infeasible correlation request is repaired with a warning") {
  SynthConfig c = pairs_only({{0, 1, 0.95}, {1, 2, 0.95}, {0, 2, -0.95}}, 500);
  const LatentCorrelation r = latent_correlation(c);
  CHECK(r.adjusted);
  for (std::size_t i = 0; i < 4; ++i) CHECK(r.used(i, i) == 1.0);
  std::vector<std::string> warnings;
  const LabelMatrix l = generate_labels(c, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("nearest valid") != std::string::npos);
  CHECK(!latent_correlation(benchmark_config()).adjusted);
}

TEST_CASE("noise-free strong models make averaging perfect") {
  SynthConfig c = benchmark_config();
  c.noise = 0.0;
  c.bias_spread = 0.0;
  c.weak_models = 0;
  c.alpha_min = c.alpha_max = 8.0;
  const SynthDataset d = generate_dataset(c);
  const EvalReport r = evaluate(average_ensemble(d.test_predictions), d.test_labels);
  CHECK(r.macro_auc == 1.0);
  for (double v : d.test_predictions.raw()) CHECK((v < 0.01 || v > 0.99));
}

TEST_CASE("overwhelming noise drives single models to chance") {
  SynthConfig c = benchmark_config();
  c.noise = 60.0;
  const SynthDataset d = generate_dataset(c);
  for (std::size_t m = 0; m < c.models; ++m) {
    ScoreMatrix s{d.train_predictions.class_names(), d.train_predictions.sample_ids(),
                  Matrix(d.train_predictions.samples(), c.classes)};
    for (std::size_t i = 0; i < s.sample_ids.size(); ++i)
      for (std::size_t k = 0; k < c.classes; ++k) s.values(i, k) = d.train_predictions.score(i, m, k);
    for (const auto& cls : evaluate(s, d.train_labels).classes) CHECK(std::abs(cls.auc - 0.5) < 0.05);
  }
}

TEST_CASE("scores stay strictly inside the unit interval") {
  SynthConfig c = benchmark_config();
  c.noise = 40.0;
  const SynthDataset d = generate_dataset(c);
  for (double v : d.train_predictions.raw()) {
    CHECK(v > 0.0);
    CHECK(v < 1.0);
  }
}

TEST_CASE("benchmark config: correlated structure and an ensemble gain") {
  const SynthConfig c = benchmark_config();
  const SynthDataset d = generate_dataset(c);
  CHECK(d.train_labels.samples() == 2500);
  CHECK(d.test_labels.samples() == 500);
  CHECK(d.train_predictions.models() == 12);
  const Matrix k = kappa_matrix(d.train_labels);
  for (const LatentPair& p : c.latent) CHECK((k(p.first, p.second) > 0.0) == (p.strength > 0.0));

  double mean = 0.0, best = 0.0;
  for (std::size_t m = 0; m < c.models; ++m) {
    const double a = single_model_auc(d.test_predictions, d.test_labels, m);
    mean += a / static_cast<double>(c.models);
    best = std::max(best, a);
  }
  CHECK(mean >= 0.65);
  CHECK(mean <= 0.80);
  CHECK(evaluate(average_ensemble(d.test_predictions), d.test_labels).macro_auc > best);
}

TEST_CASE("synth config json") {
  const SynthConfig c = benchmark_config();
  const SynthConfig back = synth_config_from_json(synth_config_to_json(c));
  CHECK(back.latent.size() == 4);
  CHECK(back.latent[3].strength == -0.7);
  CHECK(back.noise == c.noise);
  CHECK(generate_dataset(back).train_predictions == generate_dataset(c).train_predictions);
  CHECK_THROWS_AS(synth_config_from_json({{"sigma", 1.0}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"noise", -1.0}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"latent", {{0, 0, 0.5}}}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"latent", {{0, 1, 1.5}}}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"prevalence", 1.0}}), ValidationError);
  CHECK_THROWS_AS(synth_config_from_json({{"weak_models", 20}}), ValidationError);
}
