#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gnnfuse/ensemble.hpp"
#include "gnnfuse/graph.hpp"
#include "gnnfuse/matrix.hpp"
#include "json.hpp"

namespace gnnfuse {

struct LatentPair {
  std::size_t first = 0;
  std::size_t second = 0;
  double strength = 0.0;  // latent correlation in [-1, 1]
};

// Synthetic comorbid multi-label data with a simulated ensemble.
//
// Labels threshold a latent Gaussian whose correlations are given by
// `latent`; the cut points reproduce `prevalence`. Model n scores class i
// as sigmoid(alpha_n (2y - 1) + bias_n + jitter_ni + noise), where the last
// `weak_models` models get a near-zero alpha.
struct SynthConfig {
  std::size_t classes = 8;
  std::size_t samples = 2500;      // training rows
  std::size_t test_samples = 500;  // held-out rows
  std::size_t models = 12;
  std::size_t weak_models = 4;
  std::uint64_t seed = 7;
  std::vector<LatentPair> latent;
  std::vector<double> prevalence{0.3};  // one value for all classes, or one per class
  double noise = 1.6;                   // sigma of the per-score Gaussian noise
  double alpha_min = 0.5;
  double alpha_max = 1.0;
  double weak_alpha_max = 0.1;
  std::vector<double> bias;   // per-model offsets; empty means zero
  double bias_spread = 0.3;   // sd of the per-(model, class) offset
  std::vector<std::string> class_names;  // default class_1..class_C
};

// C=8, N=12, 2500/500 rows, three positive pairs at 0.8, one negative at -0.7.
SynthConfig benchmark_config();

SynthConfig synth_config_from_json(const nlohmann::json& j);
nlohmann::json synth_config_to_json(const SynthConfig& c);

struct LatentCorrelation {
  Matrix requested;
  Matrix used;  // nearest valid correlation matrix
  bool adjusted = false;
};

// Eigenvalues below 1e-6 are clipped and the diagonal rescaled to one.
LatentCorrelation latent_correlation(const SynthConfig& config);

// samples + test_samples rows. A clipped correlation request appends a
// message to `warnings` when given.
LabelMatrix generate_labels(const SynthConfig& config, std::vector<std::string>* warnings = nullptr);

PredictionTensor simulate_predictions(const LabelMatrix& labels, const SynthConfig& config);

struct SynthDataset {
  LabelMatrix train_labels;
  LabelMatrix test_labels;
  PredictionTensor train_predictions;
  PredictionTensor test_predictions;
  std::vector<std::string> warnings;
};

SynthDataset generate_dataset(const SynthConfig& config);

}  // namespace gnnfuse
